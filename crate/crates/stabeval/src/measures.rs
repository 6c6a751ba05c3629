//! Accuracy, overfitting, and the structural/comparative interpretability
//! measures. Structural measures describe one model; comparative measures
//! score the syntactic similarity of a model pair.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::learners::StructuralSummary;

/// Macro-averaged F1 over the classes present in `y_true`; per-class 0/0
/// precision, recall, or F1 count as 0.
pub fn f1_macro(y_true: &[u32], y_pred: &[u32]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let max_class = y_true
        .iter()
        .chain(y_pred.iter())
        .max()
        .copied()
        .unwrap_or(0) as usize;
    let mut tp = vec![0usize; max_class + 1];
    let mut fp = vec![0usize; max_class + 1];
    let mut fn_ = vec![0usize; max_class + 1];
    let mut present = vec![false; max_class + 1];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        present[t as usize] = true;
        if t == p {
            tp[t as usize] += 1;
        } else {
            fn_[t as usize] += 1;
            fp[p as usize] += 1;
        }
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for c in 0..=max_class {
        if !present[c] {
            continue;
        }
        let precision = ratio_or_zero(tp[c], tp[c] + fp[c]);
        let recall = ratio_or_zero(tp[c], tp[c] + fn_[c]);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        sum += f1;
        count += 1;
    }
    Ok(sum / count as f64)
}

fn ratio_or_zero(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Relative train/test F1 gap; defined as 0 when the training score is 0.
pub fn overfitting(f1_train: f64, f1_test: f64) -> f64 {
    if f1_train == 0.0 {
        0.0
    } else {
        (f1_train - f1_test) / f1_train
    }
}

/// Shared over total features used by either model. Two models using no
/// features at all are identical, hence 1.
pub fn jaccard(mask_a: &[bool], mask_b: &[bool]) -> f64 {
    debug_assert_eq!(mask_a.len(), mask_b.len());
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&a, &b) in mask_a.iter().zip(mask_b) {
        if a && b {
            inter += 1;
        }
        if a || b {
            union += 1;
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Whether a used-feature mask is constant (all features or none), the case
/// where the Pearson correlation is formally undefined.
pub fn mask_is_degenerate(mask: &[bool]) -> bool {
    mask.iter().all(|&b| b) || mask.iter().all(|&b| !b)
}

/// Sample Pearson correlation of two 0/1 used-feature vectors over the full
/// original-feature universe. Zero-variance masks fall back to 1 when the
/// masks are identical and 0 otherwise.
pub fn pearson_binary(mask_a: &[bool], mask_b: &[bool]) -> Result<f64> {
    if mask_a.len() != mask_b.len() {
        return Err(Error::LengthMismatch(mask_a.len(), mask_b.len()));
    }
    let d = mask_a.len();
    if d < 2 {
        return Err(Error::TooFew {
            what: "features",
            need: 2,
            got: d,
        });
    }
    if mask_is_degenerate(mask_a) || mask_is_degenerate(mask_b) {
        return Ok(if mask_a == mask_b { 1.0 } else { 0.0 });
    }
    let df = d as f64;
    let ma = mask_a.iter().filter(|&&x| x).count() as f64 / df;
    let mb = mask_b.iter().filter(|&&x| x).count() as f64 / df;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (&a, &b) in mask_a.iter().zip(mask_b) {
        let da = (a as u8) as f64 - ma;
        let db = (b as u8) as f64 - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Kendall's tau-b between two per-feature coefficient maps. Features rank
/// by descending coefficient magnitude over the union of both maps' keys,
/// with absent features at magnitude 0; tau-b corrects for the resulting
/// ties. Two empty maps (or maps whose magnitudes tie everywhere in the same
/// way) compare as 1; a map with no ordering information at all scores 0
/// against anything different.
pub fn kendall_tau(coef_a: &BTreeMap<usize, f64>, coef_b: &BTreeMap<usize, f64>) -> f64 {
    let union: Vec<usize> = {
        let mut keys: Vec<usize> = coef_a.keys().chain(coef_b.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    };
    let xs: Vec<f64> = union
        .iter()
        .map(|j| coef_a.get(j).map_or(0.0, |v| v.abs()))
        .collect();
    let ys: Vec<f64> = union
        .iter()
        .map(|j| coef_b.get(j).map_or(0.0, |v| v.abs()))
        .collect();
    kendall_tau_b(&xs, &ys)
}

/// Tie-corrected Kendall correlation of two equal-length score vectors.
pub fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 0 || xs == ys {
        return 1.0;
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut ties_x_only = 0i64;
    let mut ties_y_only = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let dx = xs[i].partial_cmp(&xs[j]).unwrap();
            let dy = ys[i].partial_cmp(&ys[j]).unwrap();
            use std::cmp::Ordering::*;
            match (dx, dy) {
                (Equal, Equal) => {}
                (Equal, _) => ties_x_only += 1,
                (_, Equal) => ties_y_only += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    // pairs not tied in x, and pairs not tied in y
    let untied_x = (concordant + discordant + ties_y_only) as f64;
    let untied_y = (concordant + discordant + ties_x_only) as f64;
    if untied_x == 0.0 || untied_y == 0.0 {
        // a constant vector carries no ordering information
        return 0.0;
    }
    (concordant - discordant) as f64 / (untied_x * untied_y).sqrt()
}

/// Per-fold record of one fitted model's quality and structure.
#[derive(Debug, Clone, Serialize)]
pub struct CellMetrics {
    pub repetition: usize,
    pub fold: usize,
    pub f1_test: f64,
    pub f1_train: f64,
    pub overfit: f64,
    pub structural: StructuralSummary,
}

impl CellMetrics {
    pub fn new(
        repetition: usize,
        fold: usize,
        f1_train: f64,
        f1_test: f64,
        structural: StructuralSummary,
    ) -> Self {
        CellMetrics {
            repetition,
            fold,
            f1_test,
            f1_train,
            overfit: overfitting(f1_train, f1_test),
            structural,
        }
    }

    /// Used-feature count over total features.
    pub fn feature_ratio(&self) -> f64 {
        let d = self.structural.used_feature_mask.len();
        if d == 0 {
            0.0
        } else {
            self.structural.n_features_used() as f64 / d as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{} vs {}", a, b);
    }

    #[test]
    fn f1_perfect_and_all_wrong() {
        close(f1_macro(&[0, 1, 0, 1], &[0, 1, 0, 1]).unwrap(), 1.0, 1e-12);
        close(f1_macro(&[0, 1, 0, 1], &[1, 0, 1, 0]).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn f1_confusion_example() {
        // positive class: tp=2, fp=1, fn=1 -> F1 = 2/3; mirrored negative
        // class also 2/3 -> macro 2/3
        let y_true = [1, 1, 1, 0, 0, 0];
        let y_pred = [1, 1, 0, 1, 0, 0];
        close(f1_macro(&y_true, &y_pred).unwrap(), 2.0 / 3.0, 1e-12);
    }

    #[test]
    fn f1_macro_over_present_classes_only() {
        // class 2 never appears in y_true: predictions into it only cost
        // the true class's recall
        let f = f1_macro(&[0, 0, 1, 1], &[0, 2, 1, 1]).unwrap();
        let f0 = 2.0 / 3.0; // p=1, r=1/2
        let f1 = 1.0;
        close(f, (f0 + f1) / 2.0, 1e-12);
    }

    #[test]
    fn f1_length_mismatch_is_error() {
        assert!(f1_macro(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn overfitting_examples() {
        close(overfitting(0.9, 0.81), 0.1, 1e-9);
        close(overfitting(0.8, 0.8), 0.0, 1e-12);
        close(overfitting(0.5, 0.6), -0.2, 1e-12);
        close(overfitting(0.0, 0.3), 0.0, 1e-12);
    }

    #[test]
    fn jaccard_examples() {
        let a = [true, true, false];
        assert_eq!(jaccard(&a, &a), 1.0);
        assert_eq!(
            jaccard(&[true, false, false], &[false, true, true]),
            0.0
        );
        // {f1,f2} vs {f2,f3}
        close(
            jaccard(&[true, true, false], &[false, true, true]),
            1.0 / 3.0,
            1e-12,
        );
        assert_eq!(jaccard(&[false, false], &[false, false]), 1.0);
    }

    #[test]
    fn pearson_binary_examples() {
        let a = [true, false, true, false];
        close(pearson_binary(&a, &a).unwrap(), 1.0, 1e-12);
        close(
            pearson_binary(&[true, false], &[false, true]).unwrap(),
            -1.0,
            1e-12,
        );
        close(
            pearson_binary(&[true, true, false, false], &[true, false, true, false]).unwrap(),
            0.0,
            1e-12,
        );
    }

    #[test]
    fn pearson_binary_degenerate_rules() {
        let all = [true, true, true];
        let none = [false, false, false];
        let mixed = [true, false, true];
        assert_eq!(pearson_binary(&all, &all).unwrap(), 1.0);
        assert_eq!(pearson_binary(&none, &none).unwrap(), 1.0);
        assert_eq!(pearson_binary(&all, &mixed).unwrap(), 0.0);
        assert_eq!(pearson_binary(&all, &none).unwrap(), 0.0);
    }

    fn coef(entries: &[(usize, f64)]) -> BTreeMap<usize, f64> {
        entries.iter().copied().collect()
    }

    #[test]
    fn kendall_identical_maps() {
        let a = coef(&[(0, 0.9), (1, -0.5), (2, 0.1)]);
        close(kendall_tau(&a, &a), 1.0, 1e-12);
        close(kendall_tau(&coef(&[]), &coef(&[])), 1.0, 1e-12);
    }

    #[test]
    fn kendall_reversed_ranking() {
        let a = coef(&[(0, 3.0), (1, 2.0), (2, 1.0)]);
        let b = coef(&[(0, 1.0), (1, 2.0), (2, 3.0)]);
        close(kendall_tau(&a, &b), -1.0, 1e-12);
    }

    #[test]
    fn kendall_one_swap_is_third() {
        // rankings (1,2,3) vs (1,3,2): 2 concordant, 1 discordant over 3 pairs
        let a = coef(&[(0, 3.0), (1, 2.0), (2, 1.0)]);
        let b = coef(&[(0, 3.0), (1, 1.0), (2, 2.0)]);
        close(kendall_tau(&a, &b), 1.0 / 3.0, 1e-12);
    }

    #[test]
    fn kendall_union_fills_zeros() {
        // a ranks {0 high, 1 low}; b uses only feature 0: feature 1 sits at
        // zero in b, preserving the order -> perfect agreement
        let a = coef(&[(0, 2.0), (1, 1.0)]);
        let b = coef(&[(0, 5.0)]);
        close(kendall_tau(&a, &b), 1.0, 1e-12);
        // disagreeing orders
        let c = coef(&[(1, 5.0)]);
        assert!(kendall_tau(&a, &c) < 0.0);
    }

    #[test]
    fn cell_metrics_ties_overfit_to_scores() {
        let s = StructuralSummary {
            used_feature_mask: vec![true, false, true, false],
            node_count: Some(5),
            depth: Some(2),
            rule_count: None,
            rule_conjunct_total: None,
            coefficients: None,
        };
        let m = CellMetrics::new(1, 3, 0.9, 0.81, s);
        close(m.overfit, 0.1, 1e-9);
        close(m.feature_ratio(), 0.5, 1e-12);
    }
}
