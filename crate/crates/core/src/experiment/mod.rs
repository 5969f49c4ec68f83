//! Run configurations, the solve-then-analyze pipeline, artifact files and
//! the self-check suite.

mod config;
mod pipeline;
mod plots;
mod suite;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{digest_value, AnalysisSpec, RunConfig};
pub use pipeline::{
    check_manifest, decay_table, execute, Artifact, BlowupSummary, DecayRow, DecaySummary, FormatVersions, FreeBoundarySummary,
    FrequencySummary, Plan, RunManifest, SolverSummary, Stage, StageFailure, Timing, CSV_VERSION, DECAY_CSV,
    FIELD_FILE, FREQUENCY_CSV, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use suite::{oracle_comparison, parse_grid, run_suite, Check, OracleComparison, SuiteReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot write {}: {source}", .path.display())]
    Output { path: PathBuf, source: std::io::Error },
    #[error("field file {}: {reason}", .path.display())]
    Field { path: PathBuf, reason: String },
    #[error("solver: {0}")]
    Solve(String),
}
