//! Configuration, serialization, plotting and orchestration behind the
//! `nullflow` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod svg;
pub mod verify;

use std::path::PathBuf;

use nullflow_core::estimate::EstimateError;
use nullflow_core::metric::GeometryError;
use nullflow_core::FlowError;

pub use config::{parse_config, RunConfig};
pub use run::{execute, run_to_dir, RunDocument, RunOutcome, RunSummary};

/// Version of the `report.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the worker pool.
pub const THREADS_VAR: &str = "NULLFLOW_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown configuration keys: {0}")]
    UnknownKeys(String),
    #[error("constraint `{name}` violated: {reason}")]
    Constraint { name: &'static str, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("trajectory file: {0}")]
    Trajectory(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Process exit code for a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    /// Every requested estimate holds or is gated by a failed hypothesis.
    Clean = 0,
    Violation = 1,
    Error = 2,
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when `None`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool builds")
            .install(f),
        None => f(),
    }
}

/// Reads the thread cap from the environment; unset or unparsable means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_VAR).ok()?.trim().parse().ok().filter(|&n| n > 0)
}
