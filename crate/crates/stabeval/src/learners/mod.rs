//! The three interpretable model families with structural introspection.

mod linear;
mod rules;
mod tree;

pub use linear::{
    fit_linear, lasso_cd, lasso_kkt_violation, ridge_solve, LinearModel, LinearVariant, COEF_EPS,
};
pub use rules::{fit_foil, foil_gain, Rule, RuleSetModel, DEFAULT_MIN_GAIN};
pub use tree::{
    ebp_prune, fit_tree, gain_ratio, gini, Pruning, SplitTest, TreeMode, TreeModel, TreeNode,
    TreeParams,
};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::{FeatureKind, FeatureSpec};

/// Structural description of one fitted model: which original features it
/// uses, plus family-specific size measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralSummary {
    pub used_feature_mask: Vec<bool>,
    pub node_count: Option<usize>,
    pub depth: Option<usize>,
    pub rule_count: Option<usize>,
    pub rule_conjunct_total: Option<usize>,
    /// Linear models only: per-feature coefficient magnitude (largest
    /// |coefficient| over the feature's encoded columns), nonzero entries.
    pub coefficients: Option<BTreeMap<usize, f64>>,
}

impl StructuralSummary {
    pub fn n_features_used(&self) -> usize {
        self.used_feature_mask.iter().filter(|&&b| b).count()
    }
}

/// A trained model of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Tree(TreeModel),
    Rules(RuleSetModel),
    Linear(LinearModel),
}

fn mask_from(indices: impl IntoIterator<Item = usize>, d: usize) -> Vec<bool> {
    let mut mask = vec![false; d];
    for j in indices {
        mask[j] = true;
    }
    mask
}

impl FittedModel {
    /// Feature count of the dataset the model was fitted on.
    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::Tree(m) => m.n_features,
            FittedModel::Rules(m) => m.n_features,
            FittedModel::Linear(m) => m.n_features,
        }
    }

    pub fn introspect(&self) -> StructuralSummary {
        match self {
            FittedModel::Tree(m) => StructuralSummary {
                used_feature_mask: mask_from(m.used_features(), m.n_features),
                node_count: Some(m.node_count()),
                depth: Some(m.depth()),
                rule_count: None,
                rule_conjunct_total: None,
                coefficients: None,
            },
            FittedModel::Rules(m) => StructuralSummary {
                used_feature_mask: mask_from(m.used_features(), m.n_features),
                node_count: None,
                depth: None,
                rule_count: Some(m.rule_count()),
                rule_conjunct_total: Some(m.rule_conjunct_total()),
                coefficients: None,
            },
            FittedModel::Linear(m) => StructuralSummary {
                used_feature_mask: mask_from(m.used_features(), m.n_features),
                node_count: None,
                depth: None,
                rule_count: None,
                rule_conjunct_total: None,
                coefficients: Some(m.feature_coefficients()),
            },
        }
    }

    /// Human-readable structured text form of the model, for reports.
    pub fn describe(&self, features: &[FeatureSpec], class_names: &[String]) -> String {
        match self {
            FittedModel::Tree(m) => describe_tree(m, features, class_names),
            FittedModel::Rules(m) => describe_rules(m, features, class_names),
            FittedModel::Linear(m) => describe_linear(m, features),
        }
    }
}

fn describe_tree(m: &TreeModel, features: &[FeatureSpec], class_names: &[String]) -> String {
    let mut out = format!("tree: {} nodes, depth {}\n", m.node_count(), m.depth());
    // (node index, indent, branch label)
    let mut stack: Vec<(usize, usize, String)> = vec![(0, 0, String::new())];
    while let Some((idx, indent, label)) = stack.pop() {
        let node = &m.nodes[idx];
        let pad = "  ".repeat(indent);
        if !label.is_empty() {
            out.push_str(&format!("{}{}\n", pad, label));
        }
        match &node.test {
            None => {
                out.push_str(&format!(
                    "{}  -> {} {:?}\n",
                    pad, class_names[node.prediction as usize], node.histogram
                ));
            }
            Some(test) => {
                let branches: Vec<String> = match test {
                    SplitTest::NumericLe { feature, threshold } => vec![
                        format!("{} <= {}", features[*feature].name, threshold),
                        format!("{} > {}", features[*feature].name, threshold),
                    ],
                    SplitTest::CategoryEq { feature, category } => {
                        let f = &features[*feature];
                        vec![
                            format!("{} = {}", f.name, f.categories[*category as usize]),
                            format!("{} != {}", f.name, f.categories[*category as usize]),
                        ]
                    }
                    SplitTest::Multiway {
                        feature,
                        categories,
                    } => {
                        let f = &features[*feature];
                        categories
                            .iter()
                            .map(|&c| format!("{} = {}", f.name, f.categories[c as usize]))
                            .collect()
                    }
                };
                for (pos, branch) in branches.into_iter().enumerate().rev() {
                    stack.push((node.children[pos], indent + 1, branch));
                }
            }
        }
    }
    out
}

fn describe_rules(m: &RuleSetModel, features: &[FeatureSpec], class_names: &[String]) -> String {
    let mut out = format!("rules: {} ({} conjuncts)\n", m.rule_count(), m.rule_conjunct_total());
    for rule in &m.rules {
        let body: Vec<String> = rule
            .conjuncts
            .iter()
            .map(|&(j, c)| {
                format!("{} = {}", features[j].name, features[j].categories[c as usize])
            })
            .collect();
        out.push_str(&format!(
            "{} <- {}  [covers {}]\n",
            class_names[rule.class as usize],
            body.join(" & "),
            rule.covered_positives
        ));
    }
    out.push_str(&format!(
        "default: {}\n",
        class_names[m.default_class as usize]
    ));
    out
}

fn describe_linear(m: &LinearModel, features: &[FeatureSpec]) -> String {
    let variant = match m.variant {
        LinearVariant::Ols => "ols",
        LinearVariant::Ridge => "ridge",
        LinearVariant::Lasso => "lasso",
    };
    let mut out = format!("linear: {} (alpha {})\n", variant, m.alpha);
    out.push_str(&format!("intercept: {}\n", m.intercept));
    for (i, &w) in m.coefficients.iter().enumerate() {
        if w.abs() <= COEF_EPS {
            continue;
        }
        let j = m.column_origin[i];
        let key = match (features[j].kind, m.column_category[i]) {
            (FeatureKind::Categorical, Some(c)) => {
                format!("{}={}", features[j].name, features[j].categories[c as usize])
            }
            _ => features[j].name.clone(),
        };
        out.push_str(&format!("{}: {}\n", key, w));
    }
    out
}
