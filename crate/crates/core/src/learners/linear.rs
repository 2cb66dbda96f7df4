use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Lasso: whether the sweep tolerance was met. Always true for OLS.
    pub converged: bool,
    pub sweeps: usize,
}

impl LinearParams {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>()
    }
}

pub(crate) fn check_input(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.n_rows() == 0 || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.n_rows() != y.len() {
        return Err(Error::ArityMismatch {
            expected: x.n_rows(),
            found: y.len(),
        });
    }
    if !x.all_finite() {
        return Err(Error::NonFinite("features"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("target"));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// In-place Cholesky of a symmetric matrix (row-major, `m x m`).
/// Returns false when a pivot falls to `tol` or below.
fn cholesky(a: &mut [f64], m: usize, tol: f64) -> bool {
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if d <= tol {
            return false;
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / d;
        }
    }
    true
}

/// Cholesky that zeroes out variables whose pivot is not above `tol`.
fn cholesky_skipping(a: &mut [f64], m: usize, tol: f64) -> Vec<bool> {
    let mut active = vec![true; m];
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if d <= tol {
            active[j] = false;
            for i in j..m {
                a[i * m + j] = 0.0;
            }
            continue;
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / d;
        }
    }
    active
}

fn cholesky_solve(l: &[f64], m: usize, b: &[f64], active: &[bool]) -> Vec<f64> {
    let mut z = vec![0.0; m];
    for i in 0..m {
        if !active[i] {
            continue;
        }
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * m + k] * z[k];
        }
        z[i] = s / l[i * m + i];
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        if !active[i] {
            continue;
        }
        let mut s = z[i];
        for k in i + 1..m {
            s -= l[k * m + i] * x[k];
        }
        x[i] = s / l[i * m + i];
    }
    x
}

/// Least squares with an intercept, solved on standardized columns.
///
/// Constant columns get weight 0. A singular normal system is retried once
/// with `ridge_eps` added to its diagonal; if that still fails, redundant
/// columns are dropped from the solve.
pub fn fit_ols_params(x: &Matrix, y: &[f64], ridge_eps: f64) -> Result<LinearParams> {
    check_input(x, y)?;
    let n = x.n_rows() as f64;
    let cols = x.columns();
    let y_mean = mean(y);
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let scales: Vec<f64> = cols
        .iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt())
        .collect();
    let used: Vec<usize> = (0..cols.len())
        .filter(|&j| scales[j] > 1e-12 * (means[j].abs() + 1.0))
        .collect();
    let z: Vec<Vec<f64>> = used
        .iter()
        .map(|&j| cols[j].iter().map(|v| (v - means[j]) / scales[j]).collect())
        .collect();
    let m = used.len();
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for a in 0..m {
        for b in 0..=a {
            let s = z[a].iter().zip(&z[b]).map(|(p, q)| p * q).sum::<f64>() / n;
            gram[a * m + b] = s;
            gram[b * m + a] = s;
        }
        rhs[a] = z[a].iter().zip(y).map(|(p, t)| p * (t - y_mean)).sum::<f64>() / n;
    }

    const PIVOT_TOL: f64 = 1e-10;
    let mut l = gram.clone();
    let beta = if cholesky(&mut l, m, PIVOT_TOL) {
        cholesky_solve(&l, m, &rhs, &vec![true; m])
    } else {
        let mut jittered = gram.clone();
        for i in 0..m {
            jittered[i * m + i] += ridge_eps;
        }
        let mut l = jittered.clone();
        if ridge_eps > 0.0 && cholesky(&mut l, m, 0.0) {
            cholesky_solve(&l, m, &rhs, &vec![true; m])
        } else {
            let mut l = gram;
            let active = cholesky_skipping(&mut l, m, PIVOT_TOL);
            cholesky_solve(&l, m, &rhs, &active)
        }
    };

    let mut weights = vec![0.0; cols.len()];
    for (k, &j) in used.iter().enumerate() {
        weights[j] = beta[k] / scales[j];
    }
    let intercept = y_mean - weights.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearParams {
        weights,
        intercept,
        converged: true,
        sweeps: 0,
    })
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct LassoTrace {
    pub params: LinearParams,
    /// Objective after each completed sweep.
    pub objective: Vec<f64>,
}

/// Cyclic coordinate descent on `(1/2n)||Xw + b - y||^2 + lambda ||w||_1`
/// with an unpenalized intercept.
pub fn fit_lasso_traced(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<LassoTrace> {
    check_input(x, y)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::config("lambda_l1", "must be finite and >= 0"));
    }
    let n = x.n_rows() as f64;
    let y_mean = mean(y);
    let mut cols = x.columns();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    for (c, m) in cols.iter_mut().zip(&means) {
        c.iter_mut().for_each(|v| *v -= m);
    }
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / n)
        .collect();
    let mut w = vec![0.0; cols.len()];
    let mut resid: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let objective_of = |resid: &[f64], w: &[f64]| {
        resid.iter().map(|r| r * r).sum::<f64>() / (2.0 * n)
            + lambda * w.iter().map(|v| v.abs()).sum::<f64>()
    };

    let mut objective = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..cols.len() {
            if norms[j] <= 0.0 {
                continue;
            }
            let col = &cols[j];
            let rho = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / n + norms[j] * w[j];
            let updated = soft_threshold(rho, lambda) / norms[j];
            let delta = updated - w[j];
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(col) {
                    *r -= a * delta;
                }
                w[j] = updated;
            }
            max_change = max_change.max(delta.abs());
        }
        objective.push(objective_of(&resid, &w));
        if max_change < tol {
            converged = true;
            break;
        }
    }
    let intercept = y_mean - w.iter().zip(&means).map(|(a, m)| a * m).sum::<f64>();
    Ok(LassoTrace {
        params: LinearParams {
            weights: w,
            intercept,
            converged,
            sweeps,
        },
        objective,
    })
}
