use crate::dataset::{Column, Dataset};
use crate::error::{Error, Result};

/// Numeric view of a dataset for the linear-model family: categoricals
/// one-hot over the categories seen in training, numerics z-scored with
/// training statistics (population variance).
#[derive(Debug, Clone)]
pub struct EncodedDataset {
    /// Column-major n x d' matrix.
    pub columns: Vec<Vec<f64>>,
    /// Original feature index behind each encoded column.
    pub column_origin: Vec<usize>,
    /// For one-hot columns, the category id the column indicates.
    pub column_category: Vec<Option<u32>>,
    pub labels_int: Vec<u32>,
    pub n_classes: usize,
    /// Feature count of the originating dataset.
    pub n_features: usize,
}

impl EncodedDataset {
    pub fn n_rows(&self) -> usize {
        self.labels_int.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone)]
enum ColumnEncoder {
    /// Standardize with train mean/std; zero variance maps to constant 0,
    /// missing values map to the mean.
    Numeric { mean: f64, std: f64 },
    /// One column per train-seen category id (ascending); categories unseen
    /// in training encode as the all-zeros block.
    Categorical { seen: Vec<u32> },
}

/// Fitted encoder, reusable on test rows.
#[derive(Debug, Clone)]
pub struct Encoder {
    per_feature: Vec<ColumnEncoder>,
    column_origin: Vec<usize>,
    column_category: Vec<Option<u32>>,
    n_classes: usize,
}

impl Encoder {
    pub fn n_features(&self) -> usize {
        self.per_feature.len()
    }
}

impl Encoder {
    pub fn fit(train: &Dataset) -> Result<Encoder> {
        if train.n_rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut per_feature = Vec::with_capacity(train.n_features());
        let mut column_origin = Vec::new();
        let mut column_category = Vec::new();
        for j in 0..train.n_features() {
            match train.column(j) {
                Column::Numeric(v) => {
                    let finite: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
                    let n = finite.len().max(1) as f64;
                    let mean = finite.iter().sum::<f64>() / n;
                    let var = finite.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                    per_feature.push(ColumnEncoder::Numeric {
                        mean,
                        std: var.sqrt(),
                    });
                    column_origin.push(j);
                    column_category.push(None);
                }
                Column::Categorical(v) => {
                    let mut seen: Vec<u32> = v.clone();
                    seen.sort_unstable();
                    seen.dedup();
                    for &cat in &seen {
                        column_origin.push(j);
                        column_category.push(Some(cat));
                    }
                    per_feature.push(ColumnEncoder::Categorical { seen });
                }
            }
        }
        Ok(Encoder {
            per_feature,
            column_origin,
            column_category,
            n_classes: train.n_classes(),
        })
    }

    pub fn apply(&self, data: &Dataset) -> EncodedDataset {
        let n = data.n_rows();
        let mut columns = Vec::with_capacity(self.column_origin.len());
        for (j, enc) in self.per_feature.iter().enumerate() {
            match (enc, data.column(j)) {
                (ColumnEncoder::Numeric { mean, std }, Column::Numeric(v)) => {
                    let col = v
                        .iter()
                        .map(|&x| {
                            if *std == 0.0 || !x.is_finite() {
                                0.0
                            } else {
                                (x - mean) / std
                            }
                        })
                        .collect();
                    columns.push(col);
                }
                (ColumnEncoder::Categorical { seen }, Column::Categorical(v)) => {
                    for &cat in seen {
                        let col = v.iter().map(|&c| if c == cat { 1.0 } else { 0.0 }).collect();
                        columns.push(col);
                    }
                }
                _ => panic!("encoder applied to a dataset with a different schema"),
            }
        }
        debug_assert!(columns.iter().all(|c: &Vec<f64>| c.len() == n));
        EncodedDataset {
            columns,
            column_origin: self.column_origin.clone(),
            column_category: self.column_category.clone(),
            labels_int: data.labels().to_vec(),
            n_classes: self.n_classes,
            n_features: self.per_feature.len(),
        }
    }
}

/// Fit an encoder on `train` and encode it in one step.
pub fn encode(train: &Dataset) -> Result<(EncodedDataset, Encoder)> {
    let encoder = Encoder::fit(train)?;
    let encoded = encoder.apply(train);
    Ok((encoded, encoder))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureSpec;

    fn approx(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    fn toy() -> Dataset {
        Dataset::new(
            vec![
                FeatureSpec::categorical("c", vec!["a".into(), "b".into(), "z".into()]),
                FeatureSpec::numeric("x"),
            ],
            vec![
                Column::Categorical(vec![0, 1, 2]),
                Column::Numeric(vec![1.0, 2.0, 3.0]),
            ],
            vec![0, 1, 0],
            vec!["n".into(), "y".into()],
        )
        .unwrap()
    }

    #[test]
    fn one_hot_plus_numeric_width() {
        let (enc, _) = encode(&toy()).unwrap();
        assert_eq!(enc.n_cols(), 4);
        assert_eq!(enc.column_origin, vec![0, 0, 0, 1]);
    }

    #[test]
    fn standardizes_with_population_variance() {
        let (enc, _) = encode(&toy()).unwrap();
        let x = &enc.columns[3];
        let s = (2.0f64 / 3.0).sqrt();
        approx(x[0], -1.0 / s);
        approx(x[1], 0.0);
        approx(x[2], 1.0 / s);
        approx(x[0], -1.224744871391589);
    }

    #[test]
    fn zero_variance_maps_to_zero() {
        let d = Dataset::new(
            vec![FeatureSpec::numeric("x")],
            vec![Column::Numeric(vec![5.0, 5.0, 5.0])],
            vec![0, 1, 0],
            vec!["n".into(), "y".into()],
        )
        .unwrap();
        let (enc, _) = encode(&d).unwrap();
        assert!(enc.columns[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unseen_test_category_encodes_as_zeros() {
        let train = Dataset::new(
            vec![FeatureSpec::categorical(
                "c",
                vec!["a".into(), "b".into(), "z".into()],
            )],
            vec![Column::Categorical(vec![0, 1, 0, 1])],
            vec![0, 1, 0, 1],
            vec!["n".into(), "y".into()],
        )
        .unwrap();
        let test = Dataset::new(
            train.features().to_vec(),
            vec![Column::Categorical(vec![2])],
            vec![0],
            vec!["n".into(), "y".into()],
        )
        .unwrap();
        let (_, encoder) = encode(&train).unwrap();
        let enc = encoder.apply(&test);
        assert_eq!(enc.n_cols(), 2); // only categories seen in train
        assert!(enc.columns.iter().all(|c| c[0] == 0.0));
    }
}
