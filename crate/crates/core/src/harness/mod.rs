//! Experiment runner: room-density studies, school benchmarks, result
//! emission and the command-line front end.

pub mod cli;
mod emit;
mod experiment;
mod school;
mod spec_file;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::OracleError;
use crate::planner::Policy;
use crate::scenario::{Issue, ParseError};

pub use emit::{
    emit_results, write_events_jsonl, write_ode_csv, write_trajectory_csv, OutputFormat, ResultRows,
};
pub use experiment::{run_experiment, EpisodeSummary, ExperimentSpec, RunMetrics};
pub use school::{
    classroom_scenario, estimated_students, rooms_for, simulate_school, RoomSummary,
    SchoolBenchmarkSpec, SchoolMetrics,
};
pub use spec_file::{load_experiments, load_schools, parse_experiments, parse_schools};

/// Seed used when none is given, so default invocations are reproducible.
pub const DEFAULT_SEED: u64 = 20230708;

/// One intervention setting: which actions the planner may use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variation {
    pub label: String,
    pub masks: bool,
    pub vaccines: bool,
}

impl Variation {
    /// With no intervention on offer there is nothing to plan.
    pub fn policy(&self) -> Policy {
        if self.masks || self.vaccines {
            Policy::Planner
        } else {
            Policy::Noop
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{context}: invalid scenario: {}", join(issues))]
    Invalid { context: String, issues: Vec<Issue> },
    #[error("{path}: {message}")]
    Spec { path: String, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl HarnessError {
    /// Process exit code: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

fn join(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
