//! Rank-based comparison of methods across datasets: average ranks, the
//! Friedman test, the Nemenyi post-hoc critical difference, and correlation
//! with p-values for scatter analyses.

pub mod dist;

use serde::Serialize;

use crate::error::{Error, Result};

/// Average-rank matrix over datasets (rows) and methods (columns).
/// Rank 1 is worst; with `higher_is_better` the largest value in a row gets
/// rank k, which puts the best methods on the right of a rank axis.
#[derive(Debug, Clone, Serialize)]
pub struct RankTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub ranks: Vec<Vec<f64>>,
    pub avg_ranks: Vec<f64>,
}

/// Tie-averaged ranks of one row, 1-based, larger value = larger rank.
fn row_ranks(row: &[f64]) -> Vec<f64> {
    let k = row.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; k];
    let mut i = 0;
    while i < k {
        let mut j = i;
        while j + 1 < k && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Rank methods per dataset with average-rank tie handling.
pub fn average_ranks(
    methods: Vec<String>,
    datasets: Vec<String>,
    values: Vec<Vec<f64>>,
    higher_is_better: bool,
) -> Result<RankTable> {
    let n = datasets.len();
    let k = methods.len();
    if n < 2 {
        return Err(Error::TooFew {
            what: "datasets",
            need: 2,
            got: n,
        });
    }
    if k < 2 {
        return Err(Error::TooFew {
            what: "methods",
            need: 2,
            got: k,
        });
    }
    if values.len() != n || values.iter().any(|row| row.len() != k) {
        return Err(Error::LengthMismatch(values.len(), n));
    }
    let ranks: Vec<Vec<f64>> = values
        .iter()
        .map(|row| {
            if higher_is_better {
                row_ranks(row)
            } else {
                let negated: Vec<f64> = row.iter().map(|v| -v).collect();
                row_ranks(&negated)
            }
        })
        .collect();
    let avg_ranks = (0..k)
        .map(|j| ranks.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect();
    Ok(RankTable {
        methods,
        datasets,
        values,
        ranks,
        avg_ranks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FriedmanResult {
    pub chi2_f: f64,
    pub p_value: f64,
    /// Significance levels from {0.10, 0.05, 0.01, 0.001} at which the null
    /// (all methods equivalent) is rejected.
    pub reject_at: Vec<f64>,
}

/// Friedman chi-square test over a rank table.
pub fn friedman(table: &RankTable) -> FriedmanResult {
    let n = table.datasets.len() as f64;
    let k = table.methods.len() as f64;
    let sum_sq: f64 = table.avg_ranks.iter().map(|r| r * r).sum();
    let chi2_f = (12.0 * n / (k * (k + 1.0))) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    let chi2_f = chi2_f.max(0.0);
    let p_value = dist::chi_square_sf(chi2_f, table.methods.len() - 1);
    let reject_at = [0.10, 0.05, 0.01, 0.001]
        .into_iter()
        .filter(|&a| p_value < a)
        .collect();
    FriedmanResult {
        chi2_f,
        p_value,
        reject_at,
    }
}

/// Iman-Davenport F refinement of the Friedman statistic (less conservative
/// than the chi-square form; offered as an alternative, not the default).
pub fn iman_davenport(table: &RankTable) -> (f64, f64) {
    let n = table.datasets.len() as f64;
    let k = table.methods.len() as f64;
    let chi2 = friedman(table).chi2_f;
    let denom = n * (k - 1.0) - chi2;
    if denom <= 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let f = (n - 1.0) * chi2 / denom;
    let p = dist::f_sf(
        f,
        table.methods.len() - 1,
        (table.methods.len() - 1) * (table.datasets.len() - 1),
    );
    (f, p)
}

// Critical values of the studentized range statistic divided by sqrt(2),
// the form used for the Nemenyi test; k = 2..=20. Source: Demsar,
// "Statistical comparisons of classifiers over multiple data sets",
// JMLR 7 (2006), Table 5(a). The k = 2 entries equal the two-sided normal
// quantiles 1.960 (5%) and 1.645 (10%), which anchors the convention.
const Q_ALPHA_005: [f64; 19] = [
    1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219, 3.268, 3.313, 3.354,
    3.391, 3.426, 3.458, 3.489, 3.517, 3.544,
];
const Q_ALPHA_010: [f64; 19] = [
    1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978, 3.030, 3.077, 3.120,
    3.159, 3.196, 3.230, 3.261, 3.291, 3.319,
];

/// Nemenyi critical difference: CD = q_alpha(k) * sqrt(k(k+1) / (6N)).
pub fn nemenyi_cd(k: usize, n_datasets: usize, alpha: f64) -> Result<f64> {
    if !(2..=20).contains(&k) {
        return Err(Error::InvalidParam(format!(
            "nemenyi table covers 2..=20 methods, got {}",
            k
        )));
    }
    if n_datasets == 0 {
        return Err(Error::InvalidParam("need at least one dataset".into()));
    }
    let q = if (alpha - 0.05).abs() < 1e-12 {
        Q_ALPHA_005[k - 2]
    } else if (alpha - 0.10).abs() < 1e-12 {
        Q_ALPHA_010[k - 2]
    } else {
        return Err(Error::InvalidParam(format!(
            "nemenyi alpha must be 0.05 or 0.10, got {}",
            alpha
        )));
    };
    let k = k as f64;
    Ok(q * (k * (k + 1.0) / (6.0 * n_datasets as f64)).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct NemenyiResult {
    pub critical_difference: f64,
    /// Maximal sets of method indices whose average ranks all sit within one
    /// critical difference of each other (the connected groups of a CD
    /// diagram).
    pub groups: Vec<Vec<usize>>,
}

/// Post-hoc Nemenyi grouping over a rank table.
pub fn nemenyi(table: &RankTable, alpha: f64) -> Result<NemenyiResult> {
    let cd = nemenyi_cd(table.methods.len(), table.datasets.len(), alpha)?;
    let k = table.methods.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        table.avg_ranks[a]
            .partial_cmp(&table.avg_ranks[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    // maximal intervals on the sorted rank axis
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    for i in 0..k {
        let mut j = i;
        while j + 1 < k
            && table.avg_ranks[order[j + 1]] - table.avg_ranks[order[i]] <= cd + 1e-12
        {
            j += 1;
        }
        if intervals.last().map_or(true, |&(_, pj)| j > pj) {
            intervals.push((i, j));
        }
    }
    let groups = intervals
        .into_iter()
        .map(|(i, j)| order[i..=j].to_vec())
        .collect();
    Ok(NemenyiResult {
        critical_difference: cd,
        groups,
    })
}

/// Sample Pearson correlation with a two-sided p-value from the t
/// distribution with n-2 degrees of freedom.
pub fn pearson_corr_p(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::TooFew {
            what: "points",
            need: 3,
            got: n,
        });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok((0.0, 1.0));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let one_minus_r2 = 1.0 - r * r;
    let p = if one_minus_r2 <= f64::EPSILON {
        0.0
    } else {
        let t = r * ((nf - 2.0) / one_minus_r2).sqrt();
        dist::student_t_sf_two_sided(t, n - 2)
    };
    Ok((r, p))
}

/// Spearman rank correlation: Pearson over tie-averaged ranks.
pub fn spearman_corr_p(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    let rx = row_ranks(xs);
    let ry = row_ranks(ys);
    pearson_corr_p(&rx, &ry)
}

/// Mean and sample standard deviation (ddof = 1; zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
