//! Experiment plumbing: configuration, batched runs and CSV output.

pub mod config;
pub mod csv;
pub mod run;

pub use config::{CountKind, ExperimentConfig, ModelKind, ModelSpec, RawConfig, THREADS_ENV};
pub use csv::{emit_csv, summary_csv, trace_csv, SUMMARY_FILE, TRACE_FILE};
pub use run::{run_experiment, EstimatorOutcome, ExperimentResult};

use crate::error::Error;

/// Process exit code for an error: 2 for configuration problems, 3 when an
/// oracle would need too many trials, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::OracleInfeasible { .. } => 3,
        _ => 1,
    }
}
