//! Census-style CSV ingestion, preprocessing and fold planning.

mod csv_io;
mod fetch;
mod folds;
mod frame;
mod preprocess;
mod schema;

pub use csv_io::{load_csv, write_csv};
pub use fetch::{fetch_dataset, sha256_file};
pub use folds::{make_folds, FoldPlan};
pub use frame::{Column, ColumnData, Frame, FrameStage, GroupLabels};
pub use preprocess::{percentile, preprocess, OutlierCut, PreprocessSummary, Preprocessed};
pub use schema::{ColumnKind, ColumnSpec, Schema, TrimBasis, TrimRule};
