//! Weighted-average stacking of fitted models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{LearnerConfig, Model};
use crate::matrix::Matrix;

/// Members of a stacked predictor and their raw (unnormalized) weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackSpec {
    #[serde(default = "default_label")]
    pub label: String,
    pub members: Vec<LearnerConfig>,
    pub weights: Vec<f64>,
    /// Attributes to audit the stack on. When absent, the stack is audited
    /// on the attributes flagged by a majority of the single learners.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes: Option<Vec<String>>,
}

fn default_label() -> String {
    "Stack".to_string()
}

impl StackSpec {
    /// The six-learner suite with four units of weight on each boosting or
    /// forest member and one unit on each linear member.
    pub fn tree_heavy() -> Self {
        let members = LearnerConfig::default_suite();
        let weights = members
            .iter()
            .map(|m| if m.kind.is_tree_based() { 4.0 } else { 1.0 })
            .collect();
        StackSpec {
            label: default_label(),
            members,
            weights,
            attributes: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_weights(self.members.len(), &self.weights)?;
        for m in &self.members {
            m.validate()?;
        }
        Ok(())
    }
}

fn check_weights(n_members: usize, weights: &[f64]) -> Result<()> {
    if n_members == 0 {
        return Err(Error::config("stack.members", "at least one member is required"));
    }
    if weights.len() != n_members {
        return Err(Error::config(
            "stack.weights",
            format!("{} weights for {} members", weights.len(), n_members),
        ));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::config("stack.weights", format!("weights must be positive, got {w}")));
    }
    Ok(())
}

/// Row-wise weighted mean of member predictions.
///
/// Each row's (prediction, weight) pairs are sorted before summing and the
/// mean is formed as `min + sum(w/W * (p - min))`, so the result does not
/// depend on member order and never leaves the members' range.
pub fn combine_predictions(predictions: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    check_weights(predictions.len(), weights)?;
    let n = predictions[0].len();
    if let Some(p) = predictions.iter().find(|p| p.len() != n) {
        return Err(Error::ArityMismatch {
            expected: n,
            found: p.len(),
        });
    }
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(weights.len());
    let out = (0..n)
        .map(|i| {
            pairs.clear();
            pairs.extend(predictions.iter().zip(weights).map(|(p, &w)| (p[i], w)));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let total: f64 = pairs.iter().map(|p| p.1).sum();
            let lo = pairs[0].0;
            let hi = pairs[pairs.len() - 1].0;
            let lift: f64 = pairs.iter().map(|&(p, w)| w / total * (p - lo)).sum();
            (lo + lift).clamp(lo, hi)
        })
        .collect();
    Ok(out)
}

/// Predicts with every member (concurrently) and combines the results with
/// [`combine_predictions`].
pub fn stack_predict(models: &[Model], weights: &[f64], x: &Matrix) -> Result<Vec<f64>> {
    check_weights(models.len(), weights)?;
    let predictions = models
        .par_iter()
        .map(|m| m.predict(x))
        .collect::<Result<Vec<_>>>()?;
    combine_predictions(&predictions, weights)
}
