//! ANOVA-F feature scoring and the three feature-selection methods.

use crate::dataset::{Column, Dataset};
use crate::error::{Error, Result};
use crate::learners::{fit_tree, TreeModel, TreeParams};
use crate::preprocess::PreprocOutcome;

/// Sentinel for an infinite F statistic (zero within-group variance with
/// separated group means), so perfectly separating features rank first
/// without overflowing.
pub const MAX_F: f64 = 1e12;

/// One-way ANOVA F statistic: between-group mean square over within-group
/// mean square.
pub fn anova_f(groups: &[Vec<f64>]) -> Result<f64> {
    let non_empty: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
    let g = non_empty.len();
    if g < 2 {
        return Err(Error::SingleGroup);
    }
    let n: usize = non_empty.iter().map(|v| v.len()).sum();
    let grand_mean =
        non_empty.iter().flat_map(|v| v.iter()).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for group in &non_empty {
        let m = group.iter().sum::<f64>() / group.len() as f64;
        ss_between += group.len() as f64 * (m - grand_mean) * (m - grand_mean);
        ss_within += group.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let df_between = (g - 1) as f64;
    let df_within = (n - g) as f64;
    let ms_between = ss_between / df_between;
    let ms_within = if df_within > 0.0 {
        ss_within / df_within
    } else {
        0.0
    };
    if ms_within == 0.0 {
        return Ok(if ms_between > 0.0 { MAX_F } else { 0.0 });
    }
    Ok(ms_between / ms_within)
}

fn groups_by_class(values: impl Iterator<Item = f64>, labels: &[u32], n_classes: usize) -> Vec<Vec<f64>> {
    let mut groups = vec![Vec::new(); n_classes];
    for (x, &y) in values.zip(labels) {
        if x.is_finite() {
            groups[y as usize].push(x);
        }
    }
    groups
}

/// ANOVA-F score per original feature. Numeric features score on raw
/// values; categorical features take the best F over their one-hot
/// indicator columns.
pub fn feature_scores(train: &Dataset) -> Result<Vec<f64>> {
    let labels = train.labels();
    let n_classes = train.n_classes();
    let mut scores = Vec::with_capacity(train.n_features());
    for j in 0..train.n_features() {
        let score = match train.column(j) {
            Column::Numeric(v) => {
                anova_f(&groups_by_class(v.iter().copied(), labels, n_classes))?
            }
            Column::Categorical(v) => {
                let mut cats: Vec<u32> = v.clone();
                cats.sort_unstable();
                cats.dedup();
                let mut best = 0.0f64;
                for cat in cats {
                    let indicator = v.iter().map(|&c| if c == cat { 1.0 } else { 0.0 });
                    let f = anova_f(&groups_by_class(indicator, labels, n_classes))?;
                    best = best.max(f);
                }
                best
            }
        };
        scores.push(score);
    }
    Ok(scores)
}

fn keep_top(train: &Dataset, scores: &[f64], count: usize) -> PreprocOutcome {
    let d = scores.len();
    let mut order: Vec<usize> = (0..d).collect();
    // descending score, ascending index on ties
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let mut mask = vec![false; d];
    for &j in order.iter().take(count.min(d)) {
        mask[j] = true;
    }
    PreprocOutcome {
        transformed_train: train.select_features(&mask),
        feature_mask: mask,
        instance_multiplicity: None,
    }
}

/// Keep the k top-scoring features (all of them when k >= d).
pub fn select_k_best(train: &Dataset, k: usize) -> Result<PreprocOutcome> {
    if k < 1 {
        return Err(Error::InvalidParam("select_k_best needs k >= 1".into()));
    }
    let scores = feature_scores(train)?;
    Ok(keep_top(train, &scores, k))
}

/// Keep the ceil(d * pct / 100) top-scoring features, at least one.
pub fn select_percentile(train: &Dataset, pct: f64) -> Result<PreprocOutcome> {
    if !(pct > 0.0 && pct <= 100.0) {
        return Err(Error::InvalidParam(format!(
            "percentile must be in (0, 100], got {}",
            pct
        )));
    }
    let d = train.n_features();
    let count = ((d as f64 * pct / 100.0).ceil() as usize).max(1);
    let scores = feature_scores(train)?;
    Ok(keep_top(train, &scores, count))
}

/// Impurity-decrease importance per feature of a fitted tree: the weighted
/// gini drop of every split, attributed to the split feature.
pub(crate) fn tree_feature_importance(tree: &TreeModel) -> Vec<f64> {
    let mut importance = vec![0.0f64; tree.n_features];
    let total = tree.nodes[0].histogram.iter().sum::<usize>() as f64;
    for node in &tree.nodes {
        let Some(test) = &node.test else { continue };
        let n_node: usize = node.histogram.iter().sum();
        let parent = n_node as f64 * gini_of(&node.histogram);
        let children: f64 = node
            .children
            .iter()
            .map(|&c| {
                let h = &tree.nodes[c].histogram;
                h.iter().sum::<usize>() as f64 * gini_of(h)
            })
            .sum();
        importance[test.feature()] += (parent - children) / total;
    }
    importance
}

fn gini_of(hist: &[usize]) -> f64 {
    let n: usize = hist.iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - hist
        .iter()
        .map(|&c| {
            let p = c as f64 / n as f64;
            p * p
        })
        .sum::<f64>()
}

/// Recursive feature elimination: refit the internal tree learner and drop
/// the single least important feature (ties drop the higher feature index)
/// until `target` remain.
pub fn rfe(train: &Dataset, target: usize) -> Result<PreprocOutcome> {
    let d = train.n_features();
    if target < 1 || target > d {
        return Err(Error::InvalidParam(format!(
            "rfe target must be in 1..={}, got {}",
            d, target
        )));
    }
    let mut live: Vec<usize> = (0..d).collect();
    let params = TreeParams::cart();
    while live.len() > target {
        let mut mask = vec![false; d];
        for &j in &live {
            mask[j] = true;
        }
        let reduced = train.select_features(&mask);
        let tree = fit_tree(&reduced, &params)?;
        let importance = tree_feature_importance(&tree);
        // least important; ties drop the higher original index
        let mut worst_pos = 0usize;
        for pos in 1..live.len() {
            if importance[pos] <= importance[worst_pos] {
                worst_pos = pos;
            }
        }
        live.remove(worst_pos);
    }
    let mut mask = vec![false; d];
    for &j in &live {
        mask[j] = true;
    }
    Ok(PreprocOutcome {
        transformed_train: train.select_features(&mask),
        feature_mask: mask,
        instance_multiplicity: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureSpec;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{} vs {}", a, b);
    }

    #[test]
    fn anova_examples() {
        close(
            anova_f(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap(),
            0.0,
            1e-12,
        );
        close(
            anova_f(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]]).unwrap(),
            1.5,
            1e-12,
        );
        assert_eq!(
            anova_f(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap(),
            MAX_F
        );
        assert!(anova_f(&[vec![1.0, 2.0]]).is_err());
    }

    fn numeric_dataset(cols: Vec<Vec<f64>>, labels: Vec<u32>) -> Dataset {
        let features = (0..cols.len())
            .map(|j| FeatureSpec::numeric(format!("f{}", j)))
            .collect();
        Dataset::new(
            features,
            cols.into_iter().map(Column::Numeric).collect(),
            labels,
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn skb_keeps_exact_count_and_identity_at_d() {
        let d = numeric_dataset(
            vec![
                vec![0.0, 0.0, 1.0, 1.0],
                vec![0.3, 0.1, 0.2, 0.4],
                vec![0.0, 0.1, 0.9, 1.0],
            ],
            vec![0, 0, 1, 1],
        );
        let out = select_k_best(&d, 2).unwrap();
        assert_eq!(out.feature_mask.iter().filter(|&&b| b).count(), 2);
        assert!(out.feature_mask[0] && out.feature_mask[2]);
        let out = select_k_best(&d, 3).unwrap();
        assert_eq!(out.feature_mask, vec![true, true, true]);
        let out = select_k_best(&d, 10).unwrap();
        assert_eq!(out.feature_mask, vec![true, true, true]);
    }

    #[test]
    fn equal_scores_break_to_lower_index() {
        let col = vec![0.0, 0.0, 1.0, 1.0];
        let d = numeric_dataset(
            vec![col.clone(), col.clone(), col],
            vec![0, 0, 1, 1],
        );
        let out = select_k_best(&d, 1).unwrap();
        assert_eq!(out.feature_mask, vec![true, false, false]);
    }

    #[test]
    fn percentile_uses_ceiling() {
        let cols: Vec<Vec<f64>> = (0..14)
            .map(|j| (0..4).map(|i| ((i * (j + 1)) % 5) as f64).collect())
            .collect();
        let d = numeric_dataset(cols, vec![0, 0, 1, 1]);
        let out = select_percentile(&d, 10.0).unwrap();
        // ceil(14 * 0.1) = 2
        assert_eq!(out.feature_mask.iter().filter(|&&b| b).count(), 2);
        let out = select_percentile(&d, 100.0).unwrap();
        assert_eq!(out.feature_mask.iter().filter(|&&b| b).count(), 14);
        assert!(select_percentile(&d, 0.0).is_err());
    }

    #[test]
    fn categorical_features_score_via_indicators() {
        let d = Dataset::new(
            vec![
                FeatureSpec::categorical("c", vec!["p".into(), "q".into()]),
                FeatureSpec::numeric("noise"),
            ],
            vec![
                Column::Categorical(vec![0, 0, 1, 1]),
                Column::Numeric(vec![0.4, 0.1, 0.3, 0.2]),
            ],
            vec![0, 0, 1, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let scores = feature_scores(&d).unwrap();
        assert_eq!(scores[0], MAX_F);
        assert!(scores[1] < MAX_F);
    }

    #[test]
    fn rfe_keeps_the_decisive_feature() {
        // labels depend on feature 1 alone; the rest is structured noise
        let n = 40;
        let decisive: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.0 } else { 1.0 }).collect();
        let labels: Vec<u32> = decisive.iter().map(|&x| x as u32).collect();
        let noise1: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64).collect();
        let noise2: Vec<f64> = (0..n).map(|i| ((i * 3) % 5) as f64).collect();
        let d = numeric_dataset(vec![noise1, decisive, noise2], labels);
        let out = rfe(&d, 1).unwrap();
        assert_eq!(out.feature_mask, vec![false, true, false]);
        // target = d is a no-op with zero fitting rounds
        let out = rfe(&d, 3).unwrap();
        assert_eq!(out.feature_mask, vec![true, true, true]);
    }
}
