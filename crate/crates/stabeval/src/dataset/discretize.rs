use crate::dataset::{Column, Dataset, FeatureSpec};
use crate::error::{Error, Result};

/// Equal-frequency binner fitted on a training split, turning every numeric
/// feature into a categorical one for the rule-learner family.
///
/// Cut points sit at midpoints between consecutive distinct sorted training
/// values at the quantile positions; colliding quantiles collapse, so a
/// feature may end up with fewer than `bins` categories (a constant column
/// gets one). Out-of-range values clamp to the extreme bins and missing
/// values follow the training mean.
#[derive(Debug, Clone)]
pub struct Discretizer {
    /// Per original feature: None for already-categorical features,
    /// Some((cuts, train_mean)) for numeric ones.
    per_feature: Vec<Option<(Vec<f64>, f64)>>,
    features: Vec<FeatureSpec>,
}

fn bin_labels(cuts: &[f64]) -> Vec<String> {
    if cuts.is_empty() {
        return vec!["all".to_string()];
    }
    let mut labels = Vec::with_capacity(cuts.len() + 1);
    labels.push(format!("<={}", cuts[0]));
    for w in cuts.windows(2) {
        labels.push(format!("({},{}]", w[0], w[1]));
    }
    labels.push(format!(">{}", cuts[cuts.len() - 1]));
    labels
}

fn bin_of(cuts: &[f64], x: f64) -> u32 {
    cuts.iter().filter(|&&c| x > c).count() as u32
}

impl Discretizer {
    pub fn fit(train: &Dataset, bins: usize) -> Result<Discretizer> {
        if bins < 2 {
            return Err(Error::InvalidParam(format!("bins {} < 2", bins)));
        }
        let mut per_feature = Vec::with_capacity(train.n_features());
        let mut features = Vec::with_capacity(train.n_features());
        for j in 0..train.n_features() {
            match train.column(j) {
                Column::Categorical(_) => {
                    per_feature.push(None);
                    features.push(train.feature(j).clone());
                }
                Column::Numeric(v) => {
                    let mut sorted: Vec<f64> =
                        v.iter().copied().filter(|x| x.is_finite()).collect();
                    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let n = sorted.len();
                    let mean = if n == 0 {
                        0.0
                    } else {
                        sorted.iter().sum::<f64>() / n as f64
                    };
                    let mut cuts = Vec::new();
                    for i in 1..bins {
                        let t = i * n / bins;
                        if t == 0 || t >= n {
                            continue;
                        }
                        if sorted[t - 1] < sorted[t] {
                            cuts.push((sorted[t - 1] + sorted[t]) / 2.0);
                        }
                    }
                    cuts.dedup();
                    let labels = bin_labels(&cuts);
                    features.push(FeatureSpec::categorical(train.feature(j).name.clone(), labels));
                    per_feature.push(Some((cuts, mean)));
                }
            }
        }
        Ok(Discretizer {
            per_feature,
            features,
        })
    }

    pub fn apply(&self, data: &Dataset) -> Dataset {
        let columns = (0..data.n_features())
            .map(|j| match (&self.per_feature[j], data.column(j)) {
                (None, col) => col.clone(),
                (Some((cuts, mean)), Column::Numeric(v)) => Column::Categorical(
                    v.iter()
                        .map(|&x| bin_of(cuts, if x.is_finite() { x } else { *mean }))
                        .collect(),
                ),
                _ => panic!("discretizer applied to a dataset with a different schema"),
            })
            .collect();
        Dataset::new(
            self.features.clone(),
            columns,
            data.labels().to_vec(),
            data.class_names().to_vec(),
        )
        .expect("discretized dataset is structurally valid")
    }
}

/// Fit a discretizer on `train` and apply it in one step.
pub fn discretize(train: &Dataset, bins: usize) -> Result<(Dataset, Discretizer)> {
    let disc = Discretizer::fit(train, bins)?;
    Ok((disc.apply(train), disc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_dataset(values: Vec<f64>) -> Dataset {
        let n = values.len();
        Dataset::new(
            vec![FeatureSpec::numeric("x")],
            vec![Column::Numeric(values)],
            (0..n).map(|i| (i % 2) as u32).collect(),
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn quartile_cuts_on_one_to_eight() {
        let d = numeric_dataset((1..=8).map(|i| i as f64).collect());
        let (binned, disc) = discretize(&d, 4).unwrap();
        assert_eq!(binned.feature(0).categories.len(), 4);
        match binned.column(0) {
            Column::Categorical(v) => assert_eq!(v, &[0, 0, 1, 1, 2, 2, 3, 3]),
            _ => unreachable!(),
        }
        // boundaries after 2, 4, 6
        match &disc.per_feature[0] {
            Some((cuts, _)) => assert_eq!(cuts, &vec![2.5, 4.5, 6.5]),
            None => unreachable!(),
        }
    }

    #[test]
    fn constant_column_gets_single_bin() {
        let d = numeric_dataset(vec![3.0; 6]);
        let (binned, _) = discretize(&d, 4).unwrap();
        assert_eq!(binned.feature(0).categories, vec!["all".to_string()]);
    }

    #[test]
    fn out_of_range_values_clamp() {
        let d = numeric_dataset((1..=8).map(|i| i as f64).collect());
        let (_, disc) = discretize(&d, 4).unwrap();
        let test = numeric_dataset(vec![-100.0, 100.0]);
        let t = disc.apply(&test);
        match t.column(0) {
            Column::Categorical(v) => assert_eq!(v, &[0, 3]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn preserves_rows_and_labels() {
        let d = numeric_dataset(vec![5.0, 1.0, 9.0, 2.0, 7.0]);
        let (binned, _) = discretize(&d, 3).unwrap();
        assert_eq!(binned.n_rows(), d.n_rows());
        assert_eq!(binned.labels(), d.labels());
    }

    #[test]
    fn colliding_quantiles_collapse_bins() {
        let d = numeric_dataset(vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0]);
        let (binned, _) = discretize(&d, 4).unwrap();
        assert_eq!(binned.feature(0).categories.len(), 2);
    }
}
