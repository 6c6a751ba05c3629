//! End-to-end stability evaluation: repeated stratified cross-validation
//! crossed with a list of pre-processing methods, one model family per
//! experiment, aggregated into a [`StabilityReport`].
//!
//! For a fixed (repetition, fold) every pre-processing method sees the
//! identical train/test split, which keeps comparisons across methods
//! paired. Cells are independent work units; the parallel runner sorts
//! results into canonical (repetition, fold, preproc) order before
//! aggregating, so reports are byte-identical at any worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{discretize, encode, stratified_folds, Dataset, FoldPlan, Imputer};
use crate::error::{Error, Result};
use crate::learners::{
    fit_foil, fit_linear, fit_tree, FittedModel, LinearVariant, StructuralSummary, TreeParams,
};
use crate::measures::{
    f1_macro, jaccard, kendall_tau, mask_is_degenerate, pearson_binary, CellMetrics,
};
use crate::preprocess::{apply_chain, chain_id, PreprocSpec};
use crate::stats::mean_std;

/// Bins used when discretizing numeric features for the rule learner.
pub const RULE_LEARNER_BINS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub enum ModelKind {
    Tree(TreeParams),
    Foil { min_gain_thr: f64 },
    Linear { variant: LinearVariant, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ModelSpec {
    pub id: String,
    pub kind: ModelKind,
}

impl ModelSpec {
    pub fn new(id: impl Into<String>, kind: ModelKind) -> Self {
        ModelSpec {
            id: id.into(),
            kind,
        }
    }

    pub fn is_tree(&self) -> bool {
        matches!(self.kind, ModelKind::Tree(_))
    }
}

/// One experiment: a dataset, a model, and the pre-processing methods to
/// cross it with (the identity method exactly once among them).
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub dataset_id: String,
    pub model: ModelSpec,
    /// (method id, ordered step chain) pairs.
    pub preprocs: Vec<(String, Vec<PreprocSpec>)>,
    pub repetitions: usize,
    pub folds: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn new(dataset_id: impl Into<String>, model: ModelSpec) -> Self {
        ExperimentSpec {
            dataset_id: dataset_id.into(),
            model,
            preprocs: vec![("identity".into(), vec![PreprocSpec::identity()])],
            repetitions: 5,
            folds: 10,
            master_seed: 0,
        }
    }

    pub fn with_preproc_chains(mut self, chains: Vec<Vec<PreprocSpec>>) -> Self {
        self.preprocs = chains
            .into_iter()
            .map(|c| (chain_id(&c), c))
            .collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 || self.folds < 2 {
            return Err(Error::InvalidParam(
                "need at least 1 repetition and 2 folds".into(),
            ));
        }
        let identities = self
            .preprocs
            .iter()
            .filter(|(id, _)| id == "identity")
            .count();
        if self.preprocs.is_empty() || identities != 1 {
            return Err(Error::InvalidParam(format!(
                "preproc list must contain the identity method exactly once, found {}",
                identities
            )));
        }
        let mut ids: Vec<&String> = self.preprocs.iter().map(|(id, _)| id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != self.preprocs.len() {
            return Err(Error::InvalidParam("duplicate preproc ids".into()));
        }
        Ok(())
    }
}

/// Deterministic seed derivation. Cell seeds mix the master seed with the
/// repetition, fold, and the preproc id's hash, so extending the preproc
/// list never perturbs existing cells.
pub mod seeds {
    pub fn splitmix64(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn fnv1a(s: &str) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for b in s.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        h
    }

    pub fn cell_seed(master: u64, repetition: usize, fold: usize, preproc_id: &str) -> u64 {
        let rf = ((repetition as u64) << 32) | fold as u64;
        splitmix64(splitmix64(master ^ fnv1a(preproc_id)) ^ rf)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellFailure {
    pub repetition: usize,
    pub fold: usize,
    pub preproc_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureStats {
    pub mean: f64,
    pub std: f64,
}

fn stats_of(values: &[f64]) -> MeasureStats {
    if values.is_empty() {
        return MeasureStats { mean: 0.0, std: 0.0 };
    }
    let (mean, std) = mean_std(values);
    MeasureStats { mean, std }
}

/// Aggregates for one pre-processing method: mean/std of performance,
/// overfitting, and each structural measure over the repetition x fold
/// models, and mean/std of each comparative measure over all unordered
/// model pairs.
#[derive(Debug, Clone, Serialize)]
pub struct PreprocReport {
    pub preproc_id: String,
    pub model_count: usize,
    pub pair_count: usize,
    pub f1: MeasureStats,
    pub f1_train: MeasureStats,
    pub overfit: MeasureStats,
    pub n_features_used: MeasureStats,
    pub feature_ratio: MeasureStats,
    pub node_count: Option<MeasureStats>,
    pub depth: Option<MeasureStats>,
    pub rule_count: Option<MeasureStats>,
    pub rule_size: Option<MeasureStats>,
    pub jaccard: MeasureStats,
    pub pearson: MeasureStats,
    /// Model pairs where at least one used-feature mask was constant (all
    /// or none), scored by the degenerate rule instead of the formula.
    pub pearson_degenerate_pairs: usize,
    pub kendall: Option<MeasureStats>,
    pub cells: Vec<CellMetrics>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub dataset_id: String,
    pub model_id: String,
    pub repetitions: usize,
    pub folds: usize,
    pub master_seed: u64,
    pub n_features: usize,
    pub per_preproc: Vec<PreprocReport>,
}

impl StabilityReport {
    pub fn preproc(&self, id: &str) -> Option<&PreprocReport> {
        self.per_preproc.iter().find(|p| p.preproc_id == id)
    }
}

/// Fit one model family on a conditioned training split and predict both
/// splits. Trees consume the typed data directly, the rule learner sees the
/// discretized view, linear models the one-hot/standardized encoding.
fn fit_and_predict(
    model: &ModelKind,
    train: &Dataset,
    test: &Dataset,
) -> Result<(FittedModel, Vec<u32>, Vec<u32>)> {
    match model {
        ModelKind::Tree(params) => {
            let tree = fit_tree(train, params)?;
            let train_pred = tree.predict(train)?;
            let test_pred = tree.predict(test)?;
            Ok((FittedModel::Tree(tree), train_pred, test_pred))
        }
        ModelKind::Foil { min_gain_thr } => {
            let (train_d, disc) = discretize(train, RULE_LEARNER_BINS)?;
            let test_d = disc.apply(test);
            let rules = fit_foil(&train_d, *min_gain_thr)?;
            let train_pred = rules.predict(&train_d)?;
            let test_pred = rules.predict(&test_d)?;
            Ok((FittedModel::Rules(rules), train_pred, test_pred))
        }
        ModelKind::Linear { variant, alpha } => {
            let (train_e, encoder) = encode(train)?;
            let test_e = encoder.apply(test);
            let linear = fit_linear(&train_e, *variant, *alpha)?;
            let train_pred = linear.predict(&train_e)?;
            let test_pred = linear.predict(&test_e)?;
            Ok((FittedModel::Linear(linear), train_pred, test_pred))
        }
    }
}

/// Re-express a structural summary over the original feature universe when
/// the model was fitted on a feature-selected subset.
fn lift_structural(s: StructuralSummary, feature_mask: &[bool]) -> StructuralSummary {
    let kept: Vec<usize> = feature_mask
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(j, _)| j)
        .collect();
    debug_assert_eq!(kept.len(), s.used_feature_mask.len());
    let mut mask = vec![false; feature_mask.len()];
    for (sub, &orig) in kept.iter().enumerate() {
        mask[orig] = s.used_feature_mask[sub];
    }
    let coefficients = s.coefficients.map(|m| {
        m.into_iter()
            .map(|(sub, v)| (kept[sub], v))
            .collect()
    });
    StructuralSummary {
        used_feature_mask: mask,
        coefficients,
        ..s
    }
}

fn run_cell(
    spec: &ExperimentSpec,
    data: &Dataset,
    plan: &FoldPlan,
    preproc_id: &str,
    chain: &[PreprocSpec],
) -> Result<CellMetrics> {
    let train_raw = data.select_rows(&plan.train_indices);
    let test_raw = data.select_rows(&plan.test_indices);
    let imputer = Imputer::fit(&train_raw);
    let train = imputer.apply(&train_raw);
    let test = imputer.apply(&test_raw);

    let seed = seeds::cell_seed(spec.master_seed, plan.repetition, plan.fold, preproc_id);
    let outcome = apply_chain(&train, chain, seed)?;
    let test_selected = test.select_features(&outcome.feature_mask);

    let (model, train_pred, test_pred) =
        fit_and_predict(&spec.model.kind, &outcome.transformed_train, &test_selected)?;

    let f1_train = f1_macro(outcome.transformed_train.labels(), &train_pred)?;
    let f1_test = f1_macro(test_selected.labels(), &test_pred)?;
    let structural = lift_structural(model.introspect(), &outcome.feature_mask);
    Ok(CellMetrics::new(
        plan.repetition,
        plan.fold,
        f1_train,
        f1_test,
        structural,
    ))
}

fn aggregate(
    preproc_id: &str,
    is_linear: bool,
    cells: Vec<CellMetrics>,
    failures: Vec<CellFailure>,
) -> PreprocReport {
    let collect = |f: &dyn Fn(&CellMetrics) -> f64| -> Vec<f64> { cells.iter().map(f).collect() };
    let f1 = stats_of(&collect(&|c| c.f1_test));
    let f1_train = stats_of(&collect(&|c| c.f1_train));
    let overfit = stats_of(&collect(&|c| c.overfit));
    let n_features_used = stats_of(&collect(&|c| c.structural.n_features_used() as f64));
    let feature_ratio = stats_of(&collect(&|c| c.feature_ratio()));

    let optional = |f: &dyn Fn(&CellMetrics) -> Option<f64>| -> Option<MeasureStats> {
        let values: Vec<f64> = cells.iter().filter_map(f).collect();
        if values.len() == cells.len() && !values.is_empty() {
            Some(stats_of(&values))
        } else {
            None
        }
    };
    let node_count = optional(&|c| c.structural.node_count.map(|v| v as f64));
    let depth = optional(&|c| c.structural.depth.map(|v| v as f64));
    let rule_count = optional(&|c| c.structural.rule_count.map(|v| v as f64));
    let rule_size = optional(&|c| c.structural.rule_conjunct_total.map(|v| v as f64));

    // all unordered pairs, canonical (i, j) order
    let mut jaccard_vals = Vec::new();
    let mut pearson_vals = Vec::new();
    let mut kendall_vals = Vec::new();
    let mut degenerate = 0usize;
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let (a, b) = (&cells[i].structural, &cells[j].structural);
            jaccard_vals.push(jaccard(&a.used_feature_mask, &b.used_feature_mask));
            if mask_is_degenerate(&a.used_feature_mask) || mask_is_degenerate(&b.used_feature_mask)
            {
                degenerate += 1;
            }
            pearson_vals.push(
                pearson_binary(&a.used_feature_mask, &b.used_feature_mask)
                    .expect("masks share the feature universe"),
            );
            if let (Some(ca), Some(cb)) = (&a.coefficients, &b.coefficients) {
                kendall_vals.push(kendall_tau(ca, cb));
            }
        }
    }
    let pair_count = cells.len() * cells.len().saturating_sub(1) / 2;
    PreprocReport {
        preproc_id: preproc_id.to_string(),
        model_count: cells.len(),
        pair_count,
        f1,
        f1_train,
        overfit,
        n_features_used,
        feature_ratio,
        node_count,
        depth,
        rule_count,
        rule_size,
        jaccard: stats_of(&jaccard_vals),
        pearson: stats_of(&pearson_vals),
        pearson_degenerate_pairs: degenerate,
        kendall: if is_linear && !kendall_vals.is_empty() {
            Some(stats_of(&kendall_vals))
        } else {
            None
        },
        cells,
        failures,
    }
}

/// Run the full evaluation sequentially.
pub fn evaluate_stability(spec: &ExperimentSpec, data: &Dataset) -> Result<StabilityReport> {
    evaluate_stability_with_jobs(spec, data, 1)
}

/// Run the full evaluation with up to `jobs` parallel cells. Any worker
/// count produces byte-identical reports.
pub fn evaluate_stability_with_jobs(
    spec: &ExperimentSpec,
    data: &Dataset,
    jobs: usize,
) -> Result<StabilityReport> {
    spec.validate()?;
    let plans = stratified_folds(data, spec.folds, spec.repetitions, spec.master_seed)?;

    // canonical cell order: (repetition, fold) outer, preproc inner
    let work: Vec<(usize, &FoldPlan)> = plans
        .iter()
        .flat_map(|plan| (0..spec.preprocs.len()).map(move |p| (p, plan)))
        .collect();

    let run = |&(p, plan): &(usize, &FoldPlan)| -> (usize, Result<CellMetrics>) {
        let (id, chain) = &spec.preprocs[p];
        (p, run_cell(spec, data, plan, id, chain))
    };
    let results: Vec<(usize, Result<CellMetrics>)> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {}", e)))?;
        pool.install(|| work.par_iter().map(run).collect())
    } else {
        work.iter().map(run).collect()
    };

    let mut per_preproc = Vec::with_capacity(spec.preprocs.len());
    for (p, (id, _)) in spec.preprocs.iter().enumerate() {
        let mut cells = Vec::new();
        let mut failures = Vec::new();
        for ((wp, plan), (rp, result)) in work.iter().zip(&results) {
            debug_assert_eq!(*wp, *rp);
            if *wp != p {
                continue;
            }
            match result {
                Ok(cell) => cells.push(cell.clone()),
                Err(e) => failures.push(CellFailure {
                    repetition: plan.repetition,
                    fold: plan.fold,
                    preproc_id: id.clone(),
                    message: e.to_string(),
                }),
            }
        }
        let is_linear = matches!(spec.model.kind, ModelKind::Linear { .. });
        per_preproc.push(aggregate(id, is_linear, cells, failures));
    }

    Ok(StabilityReport {
        dataset_id: spec.dataset_id.clone(),
        model_id: spec.model.id.clone(),
        repetitions: spec.repetitions,
        folds: spec.folds,
        master_seed: spec.master_seed,
        n_features: data.n_features(),
        per_preproc,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub min_cases: usize,
    pub node_count: MeasureStats,
    pub f1: MeasureStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub dataset_id: String,
    pub model_id: String,
    pub points: Vec<SweepPoint>,
}

/// Doubling grid 2, 4, 8, ... capped and terminated at n/2.
pub fn geometric_m_grid(n_rows: usize) -> Vec<usize> {
    let top = (n_rows / 2).max(2);
    let mut grid = Vec::new();
    let mut m = 2usize;
    while m < top {
        grid.push(m);
        m *= 2;
    }
    grid.push(top);
    grid.dedup();
    grid
}

/// Tree-interpretability sweep: re-run the evaluation at each stopping
/// value m, with no pre-processing, and report node-count and F1 stats.
pub fn sweep_min_cases(
    spec: &ExperimentSpec,
    data: &Dataset,
    m_values: &[usize],
) -> Result<SweepReport> {
    let ModelKind::Tree(base) = &spec.model.kind else {
        return Err(Error::InvalidParam(
            "min-cases sweep requires a tree model".into(),
        ));
    };
    let mut points = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let mut params = base.clone();
        params.min_cases = m;
        let sub = ExperimentSpec {
            dataset_id: spec.dataset_id.clone(),
            model: ModelSpec::new(spec.model.id.clone(), ModelKind::Tree(params)),
            preprocs: vec![("identity".into(), vec![PreprocSpec::identity()])],
            repetitions: spec.repetitions,
            folds: spec.folds,
            master_seed: spec.master_seed,
        };
        let report = evaluate_stability(&sub, data)?;
        let identity = report
            .preproc("identity")
            .expect("identity preproc always present");
        points.push(SweepPoint {
            min_cases: m,
            node_count: identity
                .node_count
                .expect("tree experiments always fill node counts"),
            f1: identity.f1,
        });
    }
    Ok(SweepReport {
        dataset_id: spec.dataset_id.clone(),
        model_id: spec.model.id.clone(),
        points,
    })
}
