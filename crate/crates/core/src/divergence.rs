//! Normal densities over prediction groups and the Gaussian KL divergence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest standard deviation a fitted density may have, in target units.
/// Keeps the divergence finite for groups whose predictions are constant.
pub const SIGMA_FLOOR: f64 = 1e-9;

/// A normal density fitted to one group's predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupDensity {
    pub mu: f64,
    pub sigma: f64,
    pub count: usize,
}

/// Sample mean and population standard deviation (floored at
/// [`SIGMA_FLOOR`]).
pub fn fit_normal(values: &[f64]) -> Result<GroupDensity> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("group values"));
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    Ok(GroupDensity {
        mu,
        sigma: var.sqrt().max(SIGMA_FLOOR),
        count: values.len(),
    })
}

/// KL divergence of `q` from `p` for normal densities:
/// `ln(s2/s1) + (s1^2 + (m1 - m2)^2) / (2 s2^2) - 1/2`.
///
/// The variance-ratio part is evaluated as `(u - ln(1 + u)) / 2` with
/// `u = s1^2/s2^2 - 1`, which stays accurate (and non-negative) when the
/// two spreads are nearly equal.
pub fn kl_gaussian(p: &GroupDensity, q: &GroupDensity) -> f64 {
    let ratio = p.sigma / q.sigma;
    let u = ratio * ratio - 1.0;
    let spread = 0.5 * (u - u.ln_1p());
    let gap = (p.mu - q.mu) / q.sigma;
    (spread + 0.5 * gap * gap).max(0.0)
}
