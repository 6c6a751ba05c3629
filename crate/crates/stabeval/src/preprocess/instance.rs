//! Class-balancing instance selection: random under/over-sampling and
//! synthetic minority oversampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{CellValue, Column, Dataset};
use crate::error::{Error, Result};
use crate::preprocess::{single_outcome, PreprocOutcome, StepEffect};

fn class_rows(data: &Dataset) -> Vec<Vec<usize>> {
    let mut rows = vec![Vec::new(); data.n_classes()];
    for (i, &y) in data.labels().iter().enumerate() {
        rows[y as usize].push(i);
    }
    rows
}

fn shuffle<R: Rng>(rng: &mut R, v: &mut [usize]) {
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
}

/// Downsample every class, without replacement, to the minority-class
/// count. Surviving rows keep their original order.
pub fn random_undersample(train: &Dataset, seed: u64) -> Result<PreprocOutcome> {
    let by_class = class_rows(train);
    let target = by_class
        .iter()
        .filter(|rows| !rows.is_empty())
        .map(|rows| rows.len())
        .min()
        .ok_or(Error::EmptyDataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for rows in &by_class {
        if rows.is_empty() {
            continue;
        }
        let mut shuffled = rows.clone();
        shuffle(&mut rng, &mut shuffled);
        keep.extend_from_slice(&shuffled[..target]);
    }
    keep.sort_unstable();
    let transformed = train.select_rows(&keep);
    Ok(single_outcome(
        train,
        transformed,
        StepEffect::Instances(keep.into_iter().map(Some).collect()),
    ))
}

/// Upsample every non-majority class to the majority count by replicating
/// rows at random with replacement. Originals keep their order; replicas
/// append after them, classes in ascending order.
pub fn random_oversample(train: &Dataset, seed: u64) -> Result<PreprocOutcome> {
    let by_class = class_rows(train);
    let target = by_class
        .iter()
        .map(|rows| rows.len())
        .max()
        .ok_or(Error::EmptyDataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..train.n_rows()).collect();
    for rows in &by_class {
        if rows.is_empty() {
            continue;
        }
        for _ in rows.len()..target {
            indices.push(rows[rng.gen_range(0..rows.len())]);
        }
    }
    let transformed = train.select_rows(&indices);
    Ok(single_outcome(
        train,
        transformed,
        StepEffect::Instances(indices.into_iter().map(Some).collect()),
    ))
}

/// Standardized-numeric squared distance between two rows; mismatched
/// categorical cells contribute the squared one-hot gap of 2.
fn row_distance_sq(
    train: &Dataset,
    numeric_scale: &[Option<f64>],
    a: usize,
    b: usize,
) -> f64 {
    let mut acc = 0.0;
    for j in 0..train.n_features() {
        match train.column(j) {
            Column::Numeric(v) => {
                if let Some(scale) = numeric_scale[j] {
                    let dx = (v[a] - v[b]) * scale;
                    acc += dx * dx;
                }
            }
            Column::Categorical(v) => {
                if v[a] != v[b] {
                    acc += 2.0;
                }
            }
        }
    }
    acc
}

/// Synthetic minority oversampling: every non-majority class grows to the
/// majority count with rows interpolated between a random class member and
/// one of its k nearest same-class neighbors (k capped at class size - 1).
/// Numeric cells interpolate, categorical cells copy from the base row.
pub fn smote(train: &Dataset, k_neighbors: usize, seed: u64) -> Result<PreprocOutcome> {
    if k_neighbors < 1 {
        return Err(Error::InvalidParam("smote needs k_neighbors >= 1".into()));
    }
    let by_class = class_rows(train);
    let target = by_class
        .iter()
        .map(|rows| rows.len())
        .max()
        .ok_or(Error::EmptyDataset)?;
    for (c, rows) in by_class.iter().enumerate() {
        if !rows.is_empty() && rows.len() < target && rows.len() < 2 {
            return Err(Error::TinyMinority {
                class: train.class_name(c as u32).to_string(),
            });
        }
    }
    // per-feature 1/std over the whole training split (population variance)
    let numeric_scale: Vec<Option<f64>> = (0..train.n_features())
        .map(|j| match train.column(j) {
            Column::Numeric(v) => {
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                Some(if var > 0.0 { 1.0 / var.sqrt() } else { 0.0 })
            }
            Column::Categorical(_) => None,
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transformed = train.clone();
    let mut origins: Vec<Option<usize>> = (0..train.n_rows()).map(Some).collect();
    let mut synthetic: Vec<(Vec<CellValue>, u32)> = Vec::new();

    for (c, rows) in by_class.iter().enumerate() {
        if rows.is_empty() || rows.len() >= target {
            continue;
        }
        let k = k_neighbors.min(rows.len() - 1);
        // k nearest same-class neighbors per member, ties to the lower index
        let neighbors: Vec<Vec<usize>> = rows
            .iter()
            .map(|&a| {
                let mut others: Vec<(f64, usize)> = rows
                    .iter()
                    .filter(|&&b| b != a)
                    .map(|&b| (row_distance_sq(train, &numeric_scale, a, b), b))
                    .collect();
                others.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
                others.into_iter().take(k).map(|(_, b)| b).collect()
            })
            .collect();

        for _ in rows.len()..target {
            let base_pos = rng.gen_range(0..rows.len());
            let base = rows[base_pos];
            let nb = neighbors[base_pos][rng.gen_range(0..k)];
            let lambda: f64 = rng.gen();
            let cells: Vec<CellValue> = (0..train.n_features())
                .map(|j| match (train.cell(base, j), train.cell(nb, j)) {
                    (CellValue::Num(xb), CellValue::Num(xn)) => {
                        CellValue::Num(xb + lambda * (xn - xb))
                    }
                    (cat @ CellValue::Cat(_), _) => cat,
                    _ => unreachable!(),
                })
                .collect();
            synthetic.push((cells, c as u32));
            origins.push(None);
        }
    }
    transformed.append_rows(synthetic);
    Ok(single_outcome(
        train,
        transformed,
        StepEffect::Instances(origins),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureSpec;

    fn dataset_with_counts(counts: &[usize]) -> Dataset {
        let n: usize = counts.iter().sum();
        let mut labels = Vec::new();
        for (c, &m) in counts.iter().enumerate() {
            labels.extend(std::iter::repeat(c as u32).take(m));
        }
        Dataset::new(
            vec![FeatureSpec::numeric("x"), FeatureSpec::numeric("y")],
            vec![
                Column::Numeric((0..n).map(|i| i as f64).collect()),
                Column::Numeric((0..n).map(|i| (i % 7) as f64).collect()),
            ],
            labels,
            (0..counts.len().max(2)).map(|c| format!("c{}", c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rus_balances_down() {
        let d = dataset_with_counts(&[100, 10]);
        let out = random_undersample(&d, 1).unwrap();
        assert_eq!(out.transformed_train.class_counts(), vec![10, 10]);
        // rows in original order
        let mult = out.instance_multiplicity.as_ref().unwrap();
        assert!(mult.iter().all(|&m| m <= 1));
        let mut last = 0;
        for i in 0..out.transformed_train.n_rows() {
            let x = match out.transformed_train.cell(i, 0) {
                CellValue::Num(v) => v as usize,
                _ => unreachable!(),
            };
            assert!(i == 0 || x > last);
            last = x;
        }
    }

    #[test]
    fn rus_three_classes_hit_global_minimum() {
        let d = dataset_with_counts(&[50, 20, 5]);
        let out = random_undersample(&d, 3).unwrap();
        assert_eq!(out.transformed_train.class_counts(), vec![5, 5, 5]);
    }

    #[test]
    fn rus_balanced_input_is_identity_multiset() {
        let d = dataset_with_counts(&[8, 8]);
        let out = random_undersample(&d, 7).unwrap();
        assert_eq!(out.transformed_train.n_rows(), 16);
        assert!(out
            .instance_multiplicity
            .unwrap()
            .iter()
            .all(|&m| m == 1));
    }

    #[test]
    fn ros_balances_up_with_replacement() {
        let d = dataset_with_counts(&[100, 10]);
        let out = random_oversample(&d, 2).unwrap();
        assert_eq!(out.transformed_train.class_counts(), vec![100, 100]);
        let mult = out.instance_multiplicity.unwrap();
        // the ten minority originals absorb 100 total copies
        let minority_total: usize = (100..110).map(|i| mult[i]).sum();
        assert_eq!(minority_total, 100);
        assert!(mult[..100].iter().all(|&m| m == 1));
        // every added row equals some original cell-for-cell
        for i in 110..out.transformed_train.n_rows() {
            let x = out.transformed_train.cell(i, 0);
            let found = (0..d.n_rows()).any(|r| d.cell(r, 0) == x);
            assert!(found);
        }
    }

    #[test]
    fn ros_balanced_input_unchanged() {
        let d = dataset_with_counts(&[6, 6]);
        let out = random_oversample(&d, 5).unwrap();
        assert_eq!(out.transformed_train.n_rows(), 12);
    }

    #[test]
    fn smote_midpoint_geometry() {
        // two minority parents at (0,0) and (1,1): synthetics sit on the
        // segment between them
        let d = Dataset::new(
            vec![FeatureSpec::numeric("x"), FeatureSpec::numeric("y")],
            vec![
                Column::Numeric(vec![5.0, 6.0, 7.0, 8.0, 0.0, 1.0]),
                Column::Numeric(vec![5.0, 6.0, 7.0, 8.0, 0.0, 1.0]),
            ],
            vec![0, 0, 0, 0, 1, 1],
            vec!["major".into(), "minor".into()],
        )
        .unwrap();
        let out = smote(&d, 5, 11).unwrap();
        assert_eq!(out.transformed_train.class_counts(), vec![4, 4]);
        for i in 6..out.transformed_train.n_rows() {
            let (x, y) = match (
                out.transformed_train.cell(i, 0),
                out.transformed_train.cell(i, 1),
            ) {
                (CellValue::Num(x), CellValue::Num(y)) => (x, y),
                _ => unreachable!(),
            };
            assert!((0.0..=1.0).contains(&x), "x = {}", x);
            assert!((x - y).abs() < 1e-12, "on the diagonal segment");
            assert_eq!(out.transformed_train.labels()[i], 1);
        }
    }

    #[test]
    fn smote_copies_categoricals_from_base() {
        let d = Dataset::new(
            vec![
                FeatureSpec::numeric("x"),
                FeatureSpec::categorical("c", vec!["p".into(), "q".into()]),
            ],
            vec![
                Column::Numeric(vec![0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0]),
                Column::Categorical(vec![0, 0, 1, 1, 0, 1, 0]),
            ],
            vec![0, 0, 0, 0, 1, 1, 1],
            vec!["major".into(), "minor".into()],
        )
        .unwrap();
        let out = smote(&d, 5, 3).unwrap();
        for i in 7..out.transformed_train.n_rows() {
            match out.transformed_train.cell(i, 1) {
                CellValue::Cat(c) => assert!(c <= 1),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn smote_rejects_singleton_minority() {
        let d = dataset_with_counts(&[5, 1]);
        assert!(matches!(
            smote(&d, 5, 0),
            Err(Error::TinyMinority { .. })
        ));
    }

    #[test]
    fn instance_steps_are_deterministic() {
        let d = dataset_with_counts(&[30, 7]);
        for f in [
            random_undersample as fn(&Dataset, u64) -> Result<PreprocOutcome>,
            random_oversample,
        ] {
            let a = f(&d, 42).unwrap();
            let b = f(&d, 42).unwrap();
            assert_eq!(a.transformed_train.labels(), b.transformed_train.labels());
            assert_eq!(a.instance_multiplicity, b.instance_multiplicity);
        }
        let a = smote(&d, 3, 42).unwrap();
        let b = smote(&d, 3, 42).unwrap();
        for i in 0..a.transformed_train.n_rows() {
            assert_eq!(a.transformed_train.cell(i, 0), b.transformed_train.cell(i, 0));
        }
    }
}
