//! Linear-model family on encoded data: ordinary least squares, ridge via
//! an exact normal-equations solve, and lasso via cyclic coordinate descent.
//! Class labels regress as integers 0..C-1 and decode by clamp + round.

use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};

/// Coefficients below this magnitude count as zero for introspection.
pub const COEF_EPS: f64 = 1e-9;

const LASSO_MAX_SWEEPS: usize = 1000;
const LASSO_COEF_TOL: f64 = 1e-6;
const LASSO_KKT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LinearVariant {
    Ols,
    Ridge,
    Lasso,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearModel {
    pub variant: LinearVariant,
    pub alpha: f64,
    /// One coefficient per encoded column.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub column_origin: Vec<usize>,
    pub column_category: Vec<Option<u32>>,
    pub n_features: usize,
    pub n_classes: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve (X'X + alpha I) w = X'y on raw columns, no centering or intercept.
/// Falls back to a pseudo-inverse (minimum-norm) solution when the system is
/// singular.
pub fn ridge_solve(columns: &[Vec<f64>], y: &[f64], alpha: f64) -> Vec<f64> {
    let d = columns.len();
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for j in 0..d {
        b[j] = dot(&columns[j], y);
        for k in j..d {
            let v = dot(&columns[j], &columns[k]);
            a[j][k] = v;
            a[k][j] = v;
        }
        a[j][j] += alpha;
    }
    match cholesky_solve(&a, &b) {
        Some(w) => w,
        None => pinv_solve(&a, &b),
    }
}

/// Cholesky factorization + substitution; None when not positive definite.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let d = a.len();
    if d == 0 {
        return Some(Vec::new());
    }
    let max_diag = a
        .iter()
        .enumerate()
        .map(|(j, row)| row[j].abs())
        .fold(0.0f64, f64::max);
    let floor = (max_diag * 1e-12).max(f64::MIN_POSITIVE);
    let mut l = vec![vec![0.0; d]; d];
    for j in 0..d {
        for k in 0..=j {
            let mut s = a[j][k];
            for m in 0..k {
                s -= l[j][m] * l[k][m];
            }
            if j == k {
                if s <= floor {
                    return None;
                }
                l[j][j] = s.sqrt();
            } else {
                l[j][k] = s / l[k][k];
            }
        }
    }
    // forward then back substitution
    let mut z = vec![0.0; d];
    for j in 0..d {
        let mut s = b[j];
        for m in 0..j {
            s -= l[j][m] * z[m];
        }
        z[j] = s / l[j][j];
    }
    let mut w = vec![0.0; d];
    for j in (0..d).rev() {
        let mut s = z[j];
        for m in j + 1..d {
            s -= l[m][j] * w[m];
        }
        w[j] = s / l[j][j];
    }
    Some(w)
}

/// Minimum-norm solve of a symmetric system through a Jacobi
/// eigendecomposition, dropping eigenvalues below a relative threshold.
fn pinv_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let d = a.len();
    let (vals, vecs) = jacobi_eigen(a);
    let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = max_abs * 1e-10;
    let mut w = vec![0.0; d];
    for e in 0..d {
        if vals[e].abs() <= tol {
            continue;
        }
        // projection of b on eigenvector e, scaled by 1/lambda
        let proj: f64 = (0..d).map(|i| vecs[i][e] * b[i]).sum();
        let scale = proj / vals[e];
        for i in 0..d {
            w[i] += scale * vecs[i][e];
        }
    }
    w
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and an orthogonal matrix whose columns are eigenvectors.
fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + m.iter().enumerate().map(|(i, r)| r[i].abs()).sum::<f64>())
        {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..d {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..d).map(|i| m[i][i]).collect();
    (vals, v)
}

fn soft_threshold(x: f64, a: f64) -> f64 {
    if x > a {
        x - a
    } else if x < -a {
        x + a
    } else {
        0.0
    }
}

/// Cyclic coordinate descent for min (1/2n)|y - Xw|^2 + alpha |w|_1 on raw
/// columns (callers center first when an intercept is wanted). Starts from
/// zero, so any alpha at or above max|X'y|/n returns the exact zero vector.
/// Sweeps stop once the largest coefficient change falls under 1e-6 and the
/// subgradient conditions hold to 1e-7, or after 1000 sweeps.
pub fn lasso_cd(columns: &[Vec<f64>], y: &[f64], alpha: f64) -> Vec<f64> {
    let d = columns.len();
    let n = y.len();
    let nf = n as f64;
    let col_sq: Vec<f64> = columns.iter().map(|c| dot(c, c) / nf).collect();
    let mut w = vec![0.0; d];
    let mut r = y.to_vec();
    for _sweep in 0..LASSO_MAX_SWEEPS {
        let mut max_delta = 0.0f64;
        for j in 0..d {
            if col_sq[j] <= 0.0 {
                continue;
            }
            let rho = dot(&columns[j], &r) / nf + col_sq[j] * w[j];
            let w_new = soft_threshold(rho, alpha) / col_sq[j];
            let delta = w_new - w[j];
            if delta != 0.0 {
                for (ri, xi) in r.iter_mut().zip(&columns[j]) {
                    *ri -= delta * xi;
                }
                w[j] = w_new;
            }
            max_delta = max_delta.max(delta.abs());
        }
        if max_delta < LASSO_COEF_TOL && lasso_kkt_violation(columns, &r, &w, alpha) <= LASSO_KKT_TOL
        {
            break;
        }
    }
    w
}

/// Largest violation of the lasso subgradient conditions given residual `r`.
pub fn lasso_kkt_violation(columns: &[Vec<f64>], r: &[f64], w: &[f64], alpha: f64) -> f64 {
    let nf = r.len() as f64;
    let mut worst = 0.0f64;
    for (j, col) in columns.iter().enumerate() {
        if dot(col, col) == 0.0 {
            continue;
        }
        let g = dot(col, r) / nf;
        let v = if w[j] == 0.0 {
            (g.abs() - alpha).max(0.0)
        } else {
            (g - alpha * w[j].signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Fit a linear model of the given variant; the intercept stays unpenalized
/// by centering columns and targets first.
pub fn fit_linear(data: &EncodedDataset, variant: LinearVariant, alpha: f64) -> Result<LinearModel> {
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let y: Vec<f64> = data.labels_int.iter().map(|&c| c as f64).collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let means: Vec<f64> = data
        .columns
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = data
        .columns
        .iter()
        .zip(&means)
        .map(|(c, &mu)| c.iter().map(|&x| x - mu).collect())
        .collect();

    let effective_alpha = match variant {
        LinearVariant::Ols => 0.0,
        _ => alpha,
    };
    let coefficients = match variant {
        LinearVariant::Ols | LinearVariant::Ridge => {
            ridge_solve(&centered, &yc, effective_alpha)
        }
        LinearVariant::Lasso => lasso_cd(&centered, &yc, effective_alpha),
    };
    let intercept = y_mean - dot(&coefficients, &means);
    Ok(LinearModel {
        variant,
        alpha: effective_alpha,
        coefficients,
        intercept,
        column_origin: data.column_origin.clone(),
        column_category: data.column_category.clone(),
        n_features: data.n_features,
        n_classes: data.n_classes,
    })
}

impl LinearModel {
    /// Raw regression scores X w + b.
    pub fn scores(&self, data: &EncodedDataset) -> Result<Vec<f64>> {
        if data.n_cols() != self.coefficients.len() {
            return Err(Error::SchemaMismatch(format!(
                "model has {} columns, data has {}",
                self.coefficients.len(),
                data.n_cols()
            )));
        }
        let mut scores = vec![self.intercept; data.n_rows()];
        for (col, &w) in data.columns.iter().zip(&self.coefficients) {
            if w == 0.0 {
                continue;
            }
            for (s, &x) in scores.iter_mut().zip(col) {
                *s += w * x;
            }
        }
        Ok(scores)
    }

    /// Clamp scores to [0, C-1] and round to the nearest class integer.
    pub fn predict(&self, data: &EncodedDataset) -> Result<Vec<u32>> {
        let top = (self.n_classes - 1) as f64;
        Ok(self
            .scores(data)?
            .into_iter()
            .map(|s| s.clamp(0.0, top).round() as u32)
            .collect())
    }

    /// Original features with any coefficient above [`COEF_EPS`].
    pub fn used_features(&self) -> BTreeSet<usize> {
        self.coefficients
            .iter()
            .zip(&self.column_origin)
            .filter(|(w, _)| w.abs() > COEF_EPS)
            .map(|(_, &j)| j)
            .collect()
    }

    /// Per-original-feature coefficient magnitude: the largest |coefficient|
    /// across the feature's encoded columns. Zero-weight features are
    /// omitted.
    pub fn feature_coefficients(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (w, &j) in self.coefficients.iter().zip(&self.column_origin) {
            let mag = w.abs();
            if mag > COEF_EPS {
                let entry = out.entry(j).or_insert(0.0f64);
                if mag > *entry {
                    *entry = mag;
                }
            }
        }
        out
    }
}
