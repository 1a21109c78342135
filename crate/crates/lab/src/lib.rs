//! Experiment harness for the RIS-aided HetNet simulator.
//!
//! A scenario file selects an experiment family; every (case, peak load,
//! seed) run streams per-window and per-episode CSV rows to its own files and
//! the harness writes a JSON summary with seed-level 95% intervals.

pub mod config;
pub mod experiment;
pub mod output;
pub mod stats;
pub mod trace;

use thiserror::Error;

pub use config::{Experiment, ScenarioConfig};
pub use experiment::{run_experiment, Case, RunRecord};

/// Harness errors, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("run aborted: {0}")]
    Runtime(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.into())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.into())
    }
}

impl LabError {
    /// 2 for configuration problems, 3 for everything that aborts a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Runtime(_) | Self::Io(_) => 3,
        }
    }
}
