use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by front ends to choose an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Network,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("header mismatch: missing columns {missing:?}, unexpected columns {unexpected:?}")]
    HeaderMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },

    #[error("row {row}, column `{column}`: cannot parse {value:?} as a number")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("column `{column}`: label {label:?} is not covered by the encoding")]
    UnknownLabel { column: String, label: String },

    #[error("no rows left after preprocessing")]
    EmptyAfterFilter,

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("cannot split {n_samples} samples into {k} folds")]
    TooFewSamples { n_samples: usize, k: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("feature count mismatch: model expects {expected}, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("feature names differ from the model's training features")]
    FeatureOrder,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("column `{0}` not found")]
    ColumnNotFound(String),

    #[error("column `{0}` is not a binary-encoded attribute")]
    NotBinary(String),

    #[error("attribute `{0}`: a group is empty in every test fold")]
    EmptyGroup(String),

    #[error("negative divergence score {0}")]
    NegativeScore(f64),

    #[error("download failed: {0}")]
    Network(String),

    #[error("sha256 mismatch: expected {expected}, actual {actual}")]
    DigestMismatch { expected: String, actual: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidSchema(_) | Error::InvalidConfig { .. } | Error::Json(_) => {
                ErrorClass::Config
            }
            Error::Network(_) | Error::DigestMismatch { .. } => ErrorClass::Network,
            Error::Io { .. }
            | Error::HeaderMismatch { .. }
            | Error::ParseCell { .. }
            | Error::RowWidth { .. }
            | Error::UnknownLabel { .. }
            | Error::EmptyAfterFilter
            | Error::TooFewSamples { .. }
            | Error::ColumnNotFound(_)
            | Error::NotBinary(_)
            | Error::EmptyGroup(_)
            | Error::Csv(_) => ErrorClass::Data,
            Error::EmptyInput
            | Error::ArityMismatch { .. }
            | Error::FeatureOrder
            | Error::NonFinite(_)
            | Error::NegativeScore(_) => ErrorClass::Internal,
        }
    }
}
