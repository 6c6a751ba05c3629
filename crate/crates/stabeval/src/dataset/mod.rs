//! Typed tabular datasets, stratified fold plans, and the per-split
//! conditioning steps (encoding, discretization, imputation) the learner
//! families need.

mod discretize;
mod encode;
mod folds;
mod loader;

pub use discretize::{discretize, Discretizer};
pub use encode::{encode, EncodedDataset, Encoder};
pub use folds::{stratified_folds, FoldPlan};
pub use loader::{load_csv, load_schema, ColumnRole, Schema};

use crate::error::{Error, Result};

/// Category label used for missing categorical cells.
pub const MISSING_CATEGORY: &str = "__missing__";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// One feature of a dataset. Categorical features carry their ordered,
/// duplicate-free category vocabulary; numeric ones leave it empty.
#[derive(Debug, Clone)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    pub categories: Vec<String>,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Numeric,
            categories: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical,
            categories,
        }
    }
}

/// Column-major storage for one feature. Numeric cells may be NaN until an
/// [`Imputer`] fitted on the training split fills them.
#[derive(Debug, Clone)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<u32>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, indices: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(indices.iter().map(|&i| v[i]).collect()),
            Column::Categorical(v) => Column::Categorical(indices.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// A classification dataset: typed feature columns plus integer-coded class
/// labels. Immutable after construction; cloning row subsets produces fresh
/// datasets.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<FeatureSpec>,
    columns: Vec<Column>,
    labels: Vec<u32>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<FeatureSpec>,
        columns: Vec<Column>,
        labels: Vec<u32>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if class_names.len() < 2 {
            return Err(Error::SingleClass(
                class_names.first().cloned().unwrap_or_default(),
            ));
        }
        if features.len() != columns.len() {
            return Err(Error::Schema(format!(
                "{} feature specs but {} columns",
                features.len(),
                columns.len()
            )));
        }
        let n = labels.len();
        for (spec, col) in features.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::Schema(format!(
                    "column {:?} has {} cells, expected {}",
                    spec.name,
                    col.len(),
                    n
                )));
            }
            match (spec.kind, col) {
                (FeatureKind::Numeric, Column::Numeric(_)) => {}
                (FeatureKind::Categorical, Column::Categorical(v)) => {
                    if spec.categories.is_empty() {
                        return Err(Error::Schema(format!(
                            "categorical feature {:?} has no categories",
                            spec.name
                        )));
                    }
                    let m = spec.categories.len() as u32;
                    if let Some(bad) = v.iter().find(|&&c| c >= m) {
                        return Err(Error::Schema(format!(
                            "category index {} out of range for feature {:?}",
                            bad, spec.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::Schema(format!(
                        "feature {:?} kind does not match its column storage",
                        spec.name
                    )))
                }
            }
        }
        let c = class_names.len() as u32;
        if let Some(bad) = labels.iter().find(|&&y| y >= c) {
            return Err(Error::Schema(format!("label index {} out of range", bad)));
        }
        Ok(Dataset {
            features,
            columns,
            labels,
            class_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, j: usize) -> &FeatureSpec {
        &self.features[j]
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_name(&self, y: u32) -> &str {
        &self.class_names[y as usize]
    }

    /// Per-class row counts, indexed by class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_names.len()];
        for &y in &self.labels {
            counts[y as usize] += 1;
        }
        counts
    }

    /// New dataset holding the given rows, in the given order. Indices may
    /// repeat (used by oversampling).
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.clone(),
            columns: self.columns.iter().map(|c| c.select(indices)).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// New dataset keeping only the features whose mask entry is true.
    pub fn select_features(&self, mask: &[bool]) -> Dataset {
        assert_eq!(mask.len(), self.features.len());
        let keep: Vec<usize> = (0..mask.len()).filter(|&j| mask[j]).collect();
        Dataset {
            features: keep.iter().map(|&j| self.features[j].clone()).collect(),
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Append rows from another dataset with the same feature schema.
    pub(crate) fn append_rows(&mut self, rows: Vec<(Vec<CellValue>, u32)>) {
        for (cells, label) in rows {
            debug_assert_eq!(cells.len(), self.columns.len());
            for (col, cell) in self.columns.iter_mut().zip(cells) {
                match (col, cell) {
                    (Column::Numeric(v), CellValue::Num(x)) => v.push(x),
                    (Column::Categorical(v), CellValue::Cat(c)) => v.push(c),
                    _ => unreachable!("cell kind mismatch"),
                }
            }
            self.labels.push(label);
        }
    }

    pub fn cell(&self, row: usize, feature: usize) -> CellValue {
        match &self.columns[feature] {
            Column::Numeric(v) => CellValue::Num(v[row]),
            Column::Categorical(v) => CellValue::Cat(v[row]),
        }
    }

    pub fn row(&self, row: usize) -> Vec<CellValue> {
        (0..self.n_features()).map(|j| self.cell(row, j)).collect()
    }
}

/// One cell of a dataset row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellValue {
    Num(f64),
    Cat(u32),
}

/// Fills missing numeric cells with per-feature means computed on a training
/// split. Categorical missing values are already a category of their own at
/// load time.
#[derive(Debug, Clone)]
pub struct Imputer {
    means: Vec<Option<f64>>,
}

impl Imputer {
    pub fn fit(train: &Dataset) -> Imputer {
        let means = train
            .columns
            .iter()
            .map(|col| match col {
                Column::Numeric(v) => {
                    let finite: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
                    if finite.is_empty() {
                        Some(0.0)
                    } else {
                        Some(finite.iter().sum::<f64>() / finite.len() as f64)
                    }
                }
                Column::Categorical(_) => None,
            })
            .collect();
        Imputer { means }
    }

    pub fn apply(&self, data: &Dataset) -> Dataset {
        let mut out = data.clone();
        for (col, mean) in out.columns.iter_mut().zip(&self.means) {
            if let (Column::Numeric(v), Some(m)) = (col, mean) {
                for x in v.iter_mut() {
                    if !x.is_finite() {
                        *x = *m;
                    }
                }
            }
        }
        out
    }
}
