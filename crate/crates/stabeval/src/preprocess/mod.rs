//! Training-split pre-processing: feature selection (ANOVA-scored top-k /
//! percentile, recursive feature elimination) and instance selection
//! (random under/over-sampling, synthetic minority oversampling), plus the
//! identity method and ordered chains of any of them.

mod feature;
mod instance;

pub use feature::{anova_f, feature_scores, rfe, select_k_best, select_percentile, MAX_F};
pub use instance::{random_oversample, random_undersample, smote};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;

pub const DEFAULT_SKB_K: usize = 10;
pub const DEFAULT_SP_PCT: f64 = 10.0;
pub const DEFAULT_SMOTE_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PreprocKind {
    Identity,
    /// Keep the k top ANOVA-scored features.
    Skb { k: usize },
    /// Keep the top-scoring percentage of features.
    Sp { pct: f64 },
    /// Recursive feature elimination down to `target` features
    /// (half of the features when None).
    Rfe { target: Option<usize> },
    /// Random under-sampling of every class to the minority count.
    Rus,
    /// Random over-sampling of every class to the majority count.
    Ros,
    /// Synthetic minority oversampling with k-nearest-neighbor interpolation.
    Smote { k_neighbors: usize },
}

impl PreprocKind {
    pub fn is_instance_selection(&self) -> bool {
        matches!(
            self,
            PreprocKind::Rus | PreprocKind::Ros | PreprocKind::Smote { .. }
        )
    }

    /// Stable identifier used in reports and file outputs.
    pub fn id(&self) -> String {
        match self {
            PreprocKind::Identity => "identity".into(),
            PreprocKind::Skb { k } => format!("skb(k={})", k),
            PreprocKind::Sp { pct } => format!("sp(pct={})", pct),
            PreprocKind::Rfe { target: None } => "rfe".into(),
            PreprocKind::Rfe { target: Some(t) } => format!("rfe(target={})", t),
            PreprocKind::Rus => "rus".into(),
            PreprocKind::Ros => "ros".into(),
            PreprocKind::Smote { k_neighbors } => format!("smote(k={})", k_neighbors),
        }
    }
}

/// One pre-processing step; `seed` pins the step's randomness when set,
/// otherwise the harness-derived cell seed applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocSpec {
    pub kind: PreprocKind,
    pub seed: Option<u64>,
}

impl PreprocSpec {
    pub fn new(kind: PreprocKind) -> Self {
        PreprocSpec { kind, seed: None }
    }

    pub fn identity() -> Self {
        Self::new(PreprocKind::Identity)
    }
}

/// Identifier of an ordered chain of steps.
pub fn chain_id(chain: &[PreprocSpec]) -> String {
    if chain.is_empty() {
        return "identity".into();
    }
    chain
        .iter()
        .map(|s| s.kind.id())
        .collect::<Vec<_>>()
        .join("+")
}

/// Result of applying a pre-processing step (or chain) to a training split.
#[derive(Debug, Clone)]
pub struct PreprocOutcome {
    pub transformed_train: Dataset,
    /// Over the ORIGINAL features; all-ones for instance selection and
    /// identity.
    pub feature_mask: Vec<bool>,
    /// For instance selection: how many times each original training row
    /// appears in the output (synthetic rows are not copies and do not
    /// count). None for feature selection and identity.
    pub instance_multiplicity: Option<Vec<usize>>,
}

/// How a step transformed its input, in the step's own index space.
pub(crate) enum StepEffect {
    /// Kept features, over the step's input features.
    Features(Vec<bool>),
    /// For each output row, the input row it came from (None for synthetic
    /// rows).
    Instances(Vec<Option<usize>>),
}

pub(crate) fn single_outcome(
    input: &Dataset,
    transformed: Dataset,
    effect: StepEffect,
) -> PreprocOutcome {
    match effect {
        StepEffect::Features(mask) => PreprocOutcome {
            transformed_train: transformed,
            feature_mask: mask,
            instance_multiplicity: None,
        },
        StepEffect::Instances(origins) => {
            let mut mult = vec![0usize; input.n_rows()];
            for origin in origins.iter().flatten() {
                mult[*origin] += 1;
            }
            PreprocOutcome {
                transformed_train: transformed,
                feature_mask: vec![true; input.n_features()],
                instance_multiplicity: Some(mult),
            }
        }
    }
}

/// Apply one step. The effective seed is `spec.seed` when set, else `seed`.
pub fn apply(train: &Dataset, spec: &PreprocSpec, seed: u64) -> Result<PreprocOutcome> {
    let seed = spec.seed.unwrap_or(seed);
    match &spec.kind {
        PreprocKind::Identity => Ok(PreprocOutcome {
            transformed_train: train.clone(),
            feature_mask: vec![true; train.n_features()],
            instance_multiplicity: None,
        }),
        PreprocKind::Skb { k } => select_k_best(train, *k),
        PreprocKind::Sp { pct } => select_percentile(train, *pct),
        PreprocKind::Rfe { target } => {
            let t = target.unwrap_or_else(|| (train.n_features() / 2).max(1));
            rfe(train, t)
        }
        PreprocKind::Rus => random_undersample(train, seed),
        PreprocKind::Ros => random_oversample(train, seed),
        PreprocKind::Smote { k_neighbors } => smote(train, *k_neighbors, seed),
    }
}

/// Apply an ordered chain, composing feature masks back to the original
/// feature space and row multiplicities back to the original rows. Step i
/// derives its randomness from `seed ^ i`.
pub fn apply_chain(train: &Dataset, chain: &[PreprocSpec], seed: u64) -> Result<PreprocOutcome> {
    let d = train.n_features();
    // original indices of the features still present
    let mut live_features: Vec<usize> = (0..d).collect();
    // original training row behind each current row
    let mut row_origin: Vec<Option<usize>> = (0..train.n_rows()).map(Some).collect();
    let mut current = train.clone();
    let mut any_instance_step = false;

    for (i, spec) in chain.iter().enumerate() {
        let outcome = apply(&current, spec, seed ^ i as u64)?;
        if spec.kind.is_instance_selection() {
            any_instance_step = true;
            // recover per-output-row provenance from the step
            let origins = instance_provenance(&current, &outcome);
            row_origin = origins
                .iter()
                .map(|o| o.and_then(|r| row_origin[r]))
                .collect();
        } else {
            live_features = outcome
                .feature_mask
                .iter()
                .enumerate()
                .filter(|(_, &keep)| keep)
                .map(|(j, _)| live_features[j])
                .collect();
        }
        current = outcome.transformed_train;
    }

    let mut feature_mask = vec![false; d];
    for &j in &live_features {
        feature_mask[j] = true;
    }
    let instance_multiplicity = if any_instance_step {
        let mut mult = vec![0usize; train.n_rows()];
        for origin in row_origin.iter().flatten() {
            mult[*origin] += 1;
        }
        Some(mult)
    } else {
        None
    };
    Ok(PreprocOutcome {
        transformed_train: current,
        feature_mask,
        instance_multiplicity,
    })
}

// Chains need per-row provenance, which single-step outcomes only keep as
// multiplicities. Instance steps append resampled/synthetic rows behind the
// surviving originals, so provenance is reconstructible only for steps that
// keep row identity; RUS keeps a subset in order, ROS/SMOTE keep all
// originals as a prefix. This helper rebuilds provenance from those
// contracts.
fn instance_provenance(input: &Dataset, outcome: &PreprocOutcome) -> Vec<Option<usize>> {
    let mult = outcome
        .instance_multiplicity
        .as_ref()
        .expect("instance steps carry multiplicities");
    let out_rows = outcome.transformed_train.n_rows();
    let survivors: Vec<usize> = (0..input.n_rows()).filter(|&i| mult[i] > 0).collect();
    let mut origins: Vec<Option<usize>> = Vec::with_capacity(out_rows);
    if out_rows <= input.n_rows() {
        // undersampling: surviving rows in original order
        origins.extend(survivors.iter().map(|&i| Some(i)));
    } else {
        // oversampling: all originals first, then replicas/synthetics
        origins.extend((0..input.n_rows()).map(Some));
        let mut extra: Vec<Option<usize>> = Vec::new();
        for (i, &m) in mult.iter().enumerate() {
            for _ in 1..m {
                extra.push(Some(i));
            }
        }
        // synthetic rows (not copies) fill the remainder
        while origins.len() + extra.len() < out_rows {
            extra.push(None);
        }
        origins.append(&mut extra);
    }
    debug_assert_eq!(origins.len(), out_rows);
    origins
}
