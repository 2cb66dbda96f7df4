use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Ols,
    Lasso,
    Tree,
    Forest,
    Gbt,
}

impl LearnerKind {
    pub fn is_tree_based(self) -> bool {
        matches!(self, LearnerKind::Tree | LearnerKind::Forest | LearnerKind::Gbt)
    }
}

/// Hyperparameters for every learner; each kind reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub label: String,
    pub kind: LearnerKind,
    pub ridge_eps: f64,
    pub lambda_l1: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    pub max_depth: usize,
    /// Minimum sample count in each child of a split.
    pub min_child_weight: f64,
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub colsample: f64,
    pub lambda_l2: f64,
    pub alpha: f64,
    /// Forest only: draw each member's rows with replacement.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            label: String::new(),
            kind: LearnerKind::Ols,
            ridge_eps: 1e-8,
            lambda_l1: 1.0,
            tol: 1e-6,
            max_sweeps: 10_000,
            max_depth: 6,
            min_child_weight: 1.0,
            n_estimators: 300,
            learning_rate: 0.1,
            subsample: 0.8,
            colsample: 0.8,
            lambda_l2: 1.0,
            alpha: 0.0,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl LearnerConfig {
    fn preset(label: &str, kind: LearnerKind) -> Self {
        LearnerConfig {
            label: label.to_string(),
            kind,
            ..Default::default()
        }
    }

    pub fn ols() -> Self {
        Self::preset("LinearR", LearnerKind::Ols)
    }

    pub fn lasso() -> Self {
        Self::preset("LassoR", LearnerKind::Lasso)
    }

    pub fn tree() -> Self {
        LearnerConfig {
            lambda_l2: 0.0,
            ..Self::preset("Tree", LearnerKind::Tree)
        }
    }

    pub fn forest() -> Self {
        LearnerConfig {
            n_estimators: 200,
            colsample: 0.7,
            subsample: 1.0,
            max_depth: 16,
            lambda_l2: 0.0,
            ..Self::preset("RF", LearnerKind::Forest)
        }
    }

    /// Boosting preset standing in for XGBoost.
    pub fn xgb() -> Self {
        Self::preset("XGB", LearnerKind::Gbt)
    }

    /// Boosting preset standing in for LightGBM: larger minimum leaf.
    pub fn lgbm() -> Self {
        LearnerConfig {
            min_child_weight: 20.0,
            seed: 1,
            ..Self::preset("LGBM", LearnerKind::Gbt)
        }
    }

    /// Boosting preset standing in for classic gradient boosting.
    pub fn gb() -> Self {
        LearnerConfig {
            min_child_weight: 5.0,
            seed: 2,
            ..Self::preset("GB", LearnerKind::Gbt)
        }
    }

    /// The six-learner suite in reporting order.
    pub fn default_suite() -> Vec<LearnerConfig> {
        vec![
            Self::xgb(),
            Self::lgbm(),
            Self::gb(),
            Self::forest(),
            Self::ols(),
            Self::lasso(),
        ]
    }

    pub fn for_kind(kind: LearnerKind) -> Self {
        match kind {
            LearnerKind::Ols => Self::ols(),
            LearnerKind::Lasso => Self::lasso(),
            LearnerKind::Tree => Self::tree(),
            LearnerKind::Forest => Self::forest(),
            LearnerKind::Gbt => Self::xgb(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("ridge_eps", self.ridge_eps),
            ("lambda_l1", self.lambda_l1),
            ("min_child_weight", self.min_child_weight),
            ("lambda_l2", self.lambda_l2),
            ("alpha", self.alpha),
        ];
        for (name, v) in scalars {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::config("tol", format!("must be positive, got {}", self.tol)));
        }
        let fractions = [
            ("learning_rate", self.learning_rate),
            ("subsample", self.subsample),
            ("colsample", self.colsample),
        ];
        for (name, v) in fractions {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(name, format!("must lie in (0, 1], got {v}")));
            }
        }
        if self.kind == LearnerKind::Forest && self.n_estimators == 0 {
            return Err(Error::config("n_estimators", "a forest needs at least one tree"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for c in LearnerConfig::default_suite() {
            c.validate().unwrap();
        }
        LearnerConfig::tree().validate().unwrap();
    }

    #[test]
    fn gbt_defaults() {
        let c = LearnerConfig::xgb();
        assert_eq!(
            (c.max_depth, c.n_estimators, c.learning_rate, c.subsample, c.colsample),
            (6, 300, 0.1, 0.8, 0.8)
        );
        assert_eq!((c.lambda_l2, c.alpha), (1.0, 0.0));
        let f = LearnerConfig::forest();
        assert_eq!((f.n_estimators, f.colsample), (200, 0.7));
    }

    #[test]
    fn fraction_out_of_range() {
        let c = LearnerConfig {
            subsample: 1.5,
            ..LearnerConfig::xgb()
        };
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { field, .. }) if field == "subsample"));
        let c = LearnerConfig {
            learning_rate: 0.0,
            ..LearnerConfig::xgb()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: LearnerConfig = serde_json::from_str(r#"{"label":"x","kind":"gbt","max_depth":3}"#).unwrap();
        assert_eq!(c.max_depth, 3);
        assert_eq!(c.n_estimators, 300);
    }
}
