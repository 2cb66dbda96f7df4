//! Attribute-alternation bias audits for tabular regression models.
//!
//! A fitted regressor is scored on each cross-validation test fold twice:
//! once on the data as given and once with a binary protected attribute
//! flipped on every row. Normal densities fitted to each group's
//! predictions before and after the flip are compared with the Gaussian
//! KL divergence; a large average score marks a potentially biased
//! attribute.

pub mod alternation;
pub mod audit;
pub mod divergence;
pub mod ensemble;
pub mod error;
pub mod ingest;
pub mod learners;
pub mod matrix;
mod rng;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
pub use matrix::Matrix;
