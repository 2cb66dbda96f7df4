use serde::{Deserialize, Serialize};

use crate::alternation::{AlternationSpec, DEFAULT_PBA_THRESHOLD};
use crate::ensemble::StackSpec;
use crate::error::{Error, Result};
use crate::learners::LearnerConfig;

/// How alternated predictions are produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditMode {
    /// Score the alternated test fold with the model fitted on the original
    /// training fold.
    #[default]
    PredictAlternated,
    /// Fit a second model on the alternated training fold and score the
    /// alternated test fold with it.
    RetrainAlternated,
}

impl AuditMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AuditMode::PredictAlternated => "predict-alternated",
            AuditMode::RetrainAlternated => "retrain-alternated",
        }
    }
}

impl std::str::FromStr for AuditMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predict-alternated" => Ok(AuditMode::PredictAlternated),
            "retrain-alternated" => Ok(AuditMode::RetrainAlternated),
            other => Err(Error::config(
                "mode",
                format!("expected predict-alternated or retrain-alternated, got {other:?}"),
            )),
        }
    }
}

fn default_k() -> usize {
    15
}

fn default_threshold() -> f64 {
    DEFAULT_PBA_THRESHOLD
}

/// Everything an audit run needs besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Schema file for loading the data; the bundled census schema when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub pba_specs: Vec<AlternationSpec>,
    pub learners: Vec<LearnerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack: Option<StackSpec>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: AuditMode,
    #[serde(default = "default_threshold")]
    pub pba_threshold: f64,
}

impl AuditConfig {
    pub fn new(pba_specs: Vec<AlternationSpec>, learners: Vec<LearnerConfig>) -> Self {
        AuditConfig {
            schema: None,
            pba_specs,
            learners,
            stack: None,
            k: default_k(),
            seed: 0,
            mode: AuditMode::default(),
            pba_threshold: default_threshold(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: AuditConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::config("k", format!("need at least 2 folds, got {}", self.k)));
        }
        if self.pba_specs.is_empty() {
            return Err(Error::config("pba_specs", "at least one attribute is required"));
        }
        if self.learners.is_empty() {
            return Err(Error::config("learners", "at least one learner is required"));
        }
        if !(self.pba_threshold.is_finite() && self.pba_threshold >= 0.0) {
            return Err(Error::config("pba_threshold", "must be finite and >= 0"));
        }
        for (i, l) in self.learners.iter().enumerate() {
            l.validate()?;
            if l.label.is_empty() {
                return Err(Error::config("learners", format!("learner {i} has no label")));
            }
            if self.learners[..i].iter().any(|o| o.label == l.label) {
                return Err(Error::config("learners", format!("duplicate label {:?}", l.label)));
            }
        }
        for (i, s) in self.pba_specs.iter().enumerate() {
            if self.pba_specs[..i].iter().any(|o| o.attribute == s.attribute) {
                return Err(Error::config("pba_specs", format!("duplicate attribute {:?}", s.attribute)));
            }
        }
        if let Some(stack) = &self.stack {
            stack.validate()?;
            if let Some(attrs) = &stack.attributes {
                if let Some(a) = attrs.iter().find(|a| !self.pba_specs.iter().any(|s| &s.attribute == *a)) {
                    return Err(Error::config("stack.attributes", format!("{a:?} is not a configured attribute")));
                }
            }
        }
        Ok(())
    }
}
