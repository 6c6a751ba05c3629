//! Stability impact assessment for interpretable classification models.
//!
//! The library trains decision trees, rule sets, and linear models under a
//! repeated stratified cross-validation plan crossed with feature- and
//! instance-selection methods, measures how stable the fitted models' syntax
//! is (used features, nodes, rules, coefficients), and runs the rank-based
//! statistical comparisons that turn those measurements into conclusions.
//!
//! Start with [`harness::evaluate_stability`] for the core loop, or run the
//! `stabeval` binary for the file-driven front end. Each major capability
//! also has a runnable example under `examples/`.

pub mod dataset;
pub mod error;
pub mod harness;
pub mod learners;
pub mod measures;
pub mod preprocess;
pub mod stats;

pub use error::{Error, Result};
