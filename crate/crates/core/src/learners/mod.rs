//! In-house regression learners: least squares, lasso, CART, random forest
//! and gradient-boosted trees, plus a random-search tuner.

mod config;
mod forest;
mod gbt;
mod linear;
mod model;
mod tree;
mod tune;

pub use config::{LearnerConfig, LearnerKind};
pub use linear::{fit_lasso_traced, LassoTrace, LinearParams};
pub use model::{fit_forest, fit_gbt, fit_gbt_traced, fit_lasso, fit_ols, fit_tree, Combine, Model, ModelParams};
pub use tree::Tree;
pub use tune::{cv_rmse, tune, tune_from, HyperSpace, ParamRange, Trial, TuneResult};
