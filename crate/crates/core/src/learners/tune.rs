use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LearnerConfig, LearnerKind};
use super::model::Model;
use crate::error::{Error, Result};
use crate::ingest::{make_folds, Frame};
use crate::matrix::Matrix;
use crate::rng::stream_rng;

/// Sampling range for one hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ParamRange {
    /// Uniform on `[lo, hi]`, or log-uniform when `log` is set.
    Continuous {
        lo: f64,
        hi: f64,
        #[serde(default)]
        log: bool,
    },
    /// Uniform over the integers `lo..=hi`.
    Integer { lo: i64, hi: i64 },
    /// Uniform over a list of values.
    Categorical { values: Vec<f64> },
}

impl ParamRange {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            ParamRange::Continuous { lo, hi, log } => {
                lo.is_finite() && hi.is_finite() && lo <= hi && (!log || *lo > 0.0)
            }
            ParamRange::Integer { lo, hi } => lo <= hi,
            ParamRange::Categorical { values } => {
                !values.is_empty() && values.iter().all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(name, "invalid search range"))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ParamRange::Continuous { lo, hi, log: false } => lo + rng.random::<f64>() * (hi - lo),
            ParamRange::Continuous { lo, hi, log: true } => {
                let (a, b) = (lo.ln(), hi.ln());
                (a + rng.random::<f64>() * (b - a)).exp().clamp(*lo, *hi)
            }
            ParamRange::Integer { lo, hi } => rng.random_range(*lo..=*hi) as f64,
            ParamRange::Categorical { values } => values[rng.random_range(0..values.len())],
        }
    }
}

/// Search space keyed by hyperparameter name.
///
/// Recognised names: `alpha`, `colsample`, `lambda` (leaf L2), `lambda_l1`,
/// `learning_rate`, `max_depth`, `min_child_weight`, `n_estimators`,
/// `random_state` (seed), `ridge_eps`, `subsample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperSpace {
    pub params: BTreeMap<String, ParamRange>,
}

const KNOWN: [&str; 13] = [
    "alpha",
    "colsample",
    "lambda",
    "lambda_l2",
    "lambda_l1",
    "learning_rate",
    "max_depth",
    "min_child_weight",
    "n_estimators",
    "random_state",
    "seed",
    "ridge_eps",
    "subsample",
];

fn non_negative_int(name: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::config(name, format!("expected a non-negative integer, got {v}")))
    }
}

fn apply(config: &mut LearnerConfig, name: &str, v: f64) -> Result<()> {
    match name {
        "alpha" => config.alpha = v,
        "colsample" => config.colsample = v,
        "lambda" | "lambda_l2" => config.lambda_l2 = v,
        "lambda_l1" => config.lambda_l1 = v,
        "learning_rate" => config.learning_rate = v,
        "max_depth" => config.max_depth = non_negative_int(name, v)?,
        "min_child_weight" => config.min_child_weight = v,
        "n_estimators" => config.n_estimators = non_negative_int(name, v)?,
        "random_state" | "seed" => config.seed = non_negative_int(name, v)? as u64,
        "ridge_eps" => config.ridge_eps = v,
        "subsample" => config.subsample = v,
        other => return Err(Error::config(other, "unknown hyperparameter")),
    }
    Ok(())
}

impl HyperSpace {
    /// The nine boosting parameters over conventional ranges.
    pub fn boosting_default() -> Self {
        use ParamRange::*;
        let params = [
            ("alpha", Continuous { lo: 1e-3, hi: 10.0, log: true }),
            ("colsample", Continuous { lo: 0.5, hi: 1.0, log: false }),
            ("lambda", Continuous { lo: 1e-3, hi: 10.0, log: true }),
            ("learning_rate", Continuous { lo: 0.01, hi: 0.3, log: true }),
            ("max_depth", Integer { lo: 2, hi: 10 }),
            ("min_child_weight", Integer { lo: 1, hi: 30 }),
            ("n_estimators", Integer { lo: 50, hi: 500 }),
            ("random_state", Integer { lo: 0, hi: 1000 }),
            ("subsample", Continuous { lo: 0.5, hi: 1.0, log: false }),
        ];
        HyperSpace {
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::config("space", "search space is empty"));
        }
        for (name, range) in &self.params {
            if !KNOWN.contains(&name.as_str()) {
                return Err(Error::config(name, "unknown hyperparameter"));
            }
            range.validate(name)?;
        }
        Ok(())
    }

    /// Draws one configuration on top of `base`, visiting names in order.
    pub fn sample(&self, base: &LearnerConfig, rng: &mut ChaCha8Rng) -> Result<LearnerConfig> {
        let mut config = base.clone();
        for (name, range) in &self.params {
            apply(&mut config, name, range.sample(rng))?;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub config: LearnerConfig,
    pub cv_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_config: LearnerConfig,
    pub best_cv_rmse: f64,
    pub trials: Vec<Trial>,
}

/// Root-mean-square error of out-of-fold predictions pooled over all folds.
pub fn cv_rmse(config: &LearnerConfig, x: &Matrix, y: &[f64], k: usize, seed: u64) -> Result<f64> {
    let plan = make_folds(y.len(), k, seed)?;
    let per_fold: Vec<f64> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train = plan.train_indices(f);
            let test = plan.test_indices(f);
            let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = Model::fit_matrix(config, &x.select_rows(&train), &ytr)?;
            let pred = model.predict(&x.select_rows(&test))?;
            Ok(test.iter().zip(&pred).map(|(&i, p)| (p - y[i]).powi(2)).sum::<f64>())
        })
        .collect::<Result<_>>()?;
    Ok((per_fold.iter().sum::<f64>() / y.len() as f64).sqrt())
}

/// Random search: `budget` configurations drawn from `space` on top of the
/// shipped preset for `kind`, scored by k-fold CV RMSE.
pub fn tune(kind: LearnerKind, frame: &Frame, space: &HyperSpace, budget: usize, k: usize, seed: u64) -> Result<TuneResult> {
    tune_from(&LearnerConfig::for_kind(kind), frame, space, budget, k, seed)
}

/// As [`tune`], sampling on top of an explicit base configuration.
pub fn tune_from(
    base: &LearnerConfig,
    frame: &Frame,
    space: &HyperSpace,
    budget: usize,
    k: usize,
    seed: u64,
) -> Result<TuneResult> {
    if budget == 0 {
        return Err(Error::config("budget", "need at least one trial"));
    }
    space.validate()?;
    let mut rng = stream_rng(seed, 0x7475_6e65);
    let configs = (0..budget)
        .map(|_| {
            let c = space.sample(base, &mut rng)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let x = frame.feature_matrix()?;
    let y = frame.target();
    let trials = configs
        .into_par_iter()
        .map(|config| {
            let cv_rmse = cv_rmse(&config, &x, y, k, seed)?;
            Ok(Trial { config, cv_rmse })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = trials
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cv_rmse.total_cmp(&b.1.cv_rmse).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("budget >= 1");
    Ok(TuneResult {
        best_config: trials[best].config.clone(),
        best_cv_rmse: trials[best].cv_rmse,
        trials,
    })
}
