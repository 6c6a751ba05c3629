use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by dataset loading, preprocessing, model fitting and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: cannot parse {value:?} as numeric for column {column}")]
    BadNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("class column has a single distinct value {0:?}")]
    SingleClass(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("fold count {k} exceeds row count {n}")]
    TooManyFolds { k: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("anova requires at least two non-empty groups")]
    SingleGroup,

    #[error("minority class {class:?} has a single member, cannot synthesize neighbors")]
    TinyMinority { class: String },

    #[error("rule learner requires categorical features, found numeric column {0:?}")]
    NonCategorical(String),

    #[error("label vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("model/feature schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown measure {0:?}")]
    UnknownMeasure(String),

    #[error("statistics require at least {need} {what}, got {got}")]
    TooFew {
        what: &'static str,
        need: usize,
        got: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
