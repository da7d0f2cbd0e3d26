//! Benchmark harness behind the `cnm` binary: protocol sweeps over the
//! problem catalog, success metrics for both methods, and Dolan–Moré
//! performance profiles, all written as plain TSV/CSV for external plotting.

pub mod profile;
pub mod report;
pub mod runner;
pub mod spec;

pub use profile::{performance_profile, ProfileTable};
pub use runner::{run_benchmark, BenchResult, RunOutcome};
pub use spec::{BenchmarkSpec, MChoice, Method};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown problem: {0}")]
    UnknownProblem(String),

    #[error("no runs to profile")]
    EmptyInput,

    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Solver(#[from] cubic_newton::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for runtime ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownProblem(_) | CliError::InvalidSpec(_) | CliError::EmptyInput => 2,
            CliError::Io(_) | CliError::Solver(_) => 3,
        }
    }
}
