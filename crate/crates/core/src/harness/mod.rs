//! Benchmark orchestration: configuration, grid execution, persistence,
//! summaries, CSV export and diagnostic reports.

use thiserror::Error;

pub mod analyze;
pub mod config;
pub mod export;
pub mod grid;
pub mod record;
pub mod runner;
pub mod summary;

pub use analyze::{analyze, Analysis, AnalysisReport};
pub use config::{BenchmarkConfig, ObjectiveSpec, OptimizerSpec, SuiteSpec};
pub use export::{export_summary_csv, export_trajectories_csv, TRAJECTORY_HEADER};
pub use grid::{load_records, run_grid, GridOptions, GridOutcome};
pub use record::{GenerationRecord, RunRecord, RunStatus};
pub use runner::{run_once, RunOutput};
pub use summary::{summarize, SummaryTable};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Optimizer(#[from] crate::optimizers::OptimizerError),
    #[error(transparent)]
    Objective(#[from] crate::objectives::ObjectiveError),
    #[error(transparent)]
    Diagnostics(#[from] crate::diagnostics::DiagnosticsError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("not enough data: {0}")]
    InsufficientData(String),
}
