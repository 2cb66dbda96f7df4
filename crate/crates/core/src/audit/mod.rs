//! Fold-by-fold alternation audits over a suite of learners and an
//! optional weighted stack.

mod config;
mod run;
mod table;

pub use config::{AuditConfig, AuditMode};
pub use run::{
    run_audit, run_fold, AttributeResult, AuditReport, FoldResult, LearnerAttributeResult, RunMetadata,
    StackedResult,
};
pub use table::{bias_table, BiasTable, GroupRow, ScoreRow};
