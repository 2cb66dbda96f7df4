use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{LearnerConfig, LearnerKind};
use super::forest::fit_forest_trees;
use super::gbt::fit_boosted;
use super::linear::{check_input, fit_lasso_traced, fit_ols_params, LinearParams};
use super::tree::{grow, GrowParams, SortedColumns, Tree};
use crate::error::{Error, Result};
use crate::ingest::Frame;
use crate::matrix::Matrix;
use crate::rng::stream_rng;

/// How member trees are combined into one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    /// Unweighted mean of the members (single tree, forest).
    Average,
    /// `base_score` plus the sum of the members (boosting).
    Boosted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelParams {
    Linear(LinearParams),
    Trees { combine: Combine, trees: Vec<Tree> },
}

/// A fitted regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub label: String,
    pub kind: LearnerKind,
    pub feature_names: Vec<String>,
    /// Mean of the training target.
    pub base_score: f64,
    pub params: ModelParams,
    pub config: LearnerConfig,
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|j| format!("x{j}")).collect()
}

fn target_mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

fn linear_model(config: LearnerConfig, x: &Matrix, y: &[f64], p: LinearParams) -> Model {
    Model {
        label: config.label.clone(),
        kind: config.kind,
        feature_names: default_names(x.n_cols()),
        base_score: target_mean(y),
        params: ModelParams::Linear(p),
        config,
    }
}

fn tree_model(config: LearnerConfig, x: &Matrix, base: f64, combine: Combine, trees: Vec<Tree>) -> Model {
    Model {
        label: config.label.clone(),
        kind: config.kind,
        feature_names: default_names(x.n_cols()),
        base_score: base,
        params: ModelParams::Trees { combine, trees },
        config,
    }
}

/// Ordinary least squares with an intercept.
pub fn fit_ols(x: &Matrix, y: &[f64], ridge_eps: f64) -> Result<Model> {
    let config = LearnerConfig {
        ridge_eps,
        ..LearnerConfig::ols()
    };
    config.validate()?;
    let p = fit_ols_params(x, y, ridge_eps)?;
    Ok(linear_model(config, x, y, p))
}

/// L1-penalized least squares by cyclic coordinate descent. A fit that
/// exhausts `max_sweeps` is returned with `converged = false`.
pub fn fit_lasso(x: &Matrix, y: &[f64], lambda_l1: f64, tol: f64, max_sweeps: usize) -> Result<Model> {
    let config = LearnerConfig {
        lambda_l1,
        tol,
        max_sweeps,
        ..LearnerConfig::lasso()
    };
    config.validate()?;
    let t = fit_lasso_traced(x, y, lambda_l1, tol, max_sweeps)?;
    Ok(linear_model(config, x, y, t.params))
}

/// A single regression tree on all rows and features.
pub fn fit_tree(x: &Matrix, y: &[f64], config: &LearnerConfig) -> Result<Model> {
    check_input(x, y)?;
    config.validate()?;
    let data = SortedColumns::new(x);
    let features: Vec<usize> = (0..x.n_cols()).collect();
    let params = GrowParams {
        lambda: config.lambda_l2,
        alpha: config.alpha,
        ..GrowParams::cart(config.max_depth, config.min_child_weight)
    };
    let w = vec![1.0; y.len()];
    let tree = grow(&data, y, &w, &features, &params, &mut stream_rng(config.seed, 0));
    let config = LearnerConfig {
        kind: LearnerKind::Tree,
        ..config.clone()
    };
    Ok(tree_model(config, x, target_mean(y), Combine::Average, vec![tree]))
}

/// Random forest: bootstrap members with per-split column sampling.
pub fn fit_forest(x: &Matrix, y: &[f64], config: &LearnerConfig) -> Result<Model> {
    check_input(x, y)?;
    config.validate()?;
    if config.n_estimators == 0 {
        return Err(Error::config("n_estimators", "a forest needs at least one tree"));
    }
    let trees = fit_forest_trees(x, y, config);
    let config = LearnerConfig {
        kind: LearnerKind::Forest,
        ..config.clone()
    };
    Ok(tree_model(config, x, target_mean(y), Combine::Average, trees))
}

/// Gradient-boosted trees under squared loss.
pub fn fit_gbt(x: &Matrix, y: &[f64], config: &LearnerConfig) -> Result<Model> {
    Ok(fit_gbt_traced(x, y, config)?.0)
}

/// As [`fit_gbt`], also returning the training MSE before the first stage
/// and after each stage.
pub fn fit_gbt_traced(x: &Matrix, y: &[f64], config: &LearnerConfig) -> Result<(Model, Vec<f64>)> {
    check_input(x, y)?;
    config.validate()?;
    let b = fit_boosted(x, y, config);
    let config = LearnerConfig {
        kind: LearnerKind::Gbt,
        ..config.clone()
    };
    Ok((
        tree_model(config, x, b.base_score, Combine::Boosted, b.trees),
        b.stage_mse,
    ))
}

impl Model {
    /// Fits the learner described by `config` on a feature matrix.
    pub fn fit_matrix(config: &LearnerConfig, x: &Matrix, y: &[f64]) -> Result<Model> {
        let mut model = match config.kind {
            LearnerKind::Ols => fit_ols(x, y, config.ridge_eps)?,
            LearnerKind::Lasso => fit_lasso(x, y, config.lambda_l1, config.tol, config.max_sweeps)?,
            LearnerKind::Tree => fit_tree(x, y, config)?,
            LearnerKind::Forest => fit_forest(x, y, config)?,
            LearnerKind::Gbt => fit_gbt(x, y, config)?,
        };
        model.config = config.clone();
        model.label = config.label.clone();
        Ok(model)
    }

    /// Fits on a preprocessed frame's features and target.
    pub fn fit(config: &LearnerConfig, frame: &Frame) -> Result<Model> {
        let x = frame.feature_matrix()?;
        let mut model = Self::fit_matrix(config, &x, frame.target())?;
        model.feature_names = frame.feature_names();
        Ok(model)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Linear(p) => p.predict_row(row),
            ModelParams::Trees { combine, trees } => match combine {
                Combine::Boosted => {
                    self.base_score + trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
                }
                Combine::Average => {
                    trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / trees.len() as f64
                }
            },
        }
    }

    /// One prediction per row; columns must follow `feature_names`.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.feature_names.len() {
            return Err(Error::ArityMismatch {
                expected: self.feature_names.len(),
                found: x.n_cols(),
            });
        }
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }

    /// Predicts on a frame after checking its feature names and order.
    pub fn predict_frame(&self, frame: &Frame) -> Result<Vec<f64>> {
        let names = frame.feature_names();
        if names.len() != self.feature_names.len() {
            return Err(Error::ArityMismatch {
                expected: self.feature_names.len(),
                found: names.len(),
            });
        }
        if names != self.feature_names {
            return Err(Error::FeatureOrder);
        }
        self.predict(&frame.feature_matrix()?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y = rows.iter().map(|r| 3.0 * r[0] - r[1] * r[1] + 5.0).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn ols_affine_prediction() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let m = fit_ols(&x, &[2.0, 4.0, 6.0], 1e-8).unwrap();
        let p = m.predict(&Matrix::from_rows(&[vec![10.0]]).unwrap()).unwrap();
        assert!((p[0] - 20.0).abs() < 1e-8);
    }

    #[test]
    fn zero_stage_gbt_predicts_base() {
        let (x, y) = toy();
        let c = LearnerConfig {
            n_estimators: 0,
            ..LearnerConfig::xgb()
        };
        let m = fit_gbt(&x, &y, &c).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!(m.predict(&x).unwrap().iter().all(|&p| p == mean));
    }

    #[test]
    fn arity_mismatch() {
        let (x, y) = toy();
        let m = fit_ols(&x, &y, 1e-8).unwrap();
        let bad = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(m.predict(&bad), Err(Error::ArityMismatch { expected: 2, found: 1 })));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let (x, y) = toy();
        for c in LearnerConfig::default_suite() {
            let c = LearnerConfig {
                n_estimators: c.n_estimators.min(20),
                ..c
            };
            let m = Model::fit_matrix(&c, &x, &y).unwrap();
            let back = Model::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m);
            let a = m.predict(&x).unwrap();
            let b = back.predict(&x).unwrap();
            assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }
}
