//! Orchestration layer over the solver core: configuration, solve and sweep
//! drivers, the property-check suite, inequality-constant reports, and all
//! file output.

use thiserror::Error;

pub mod checks;
pub mod config;
pub mod constants_run;
pub mod output;
pub mod solve_run;
pub mod sweep;

pub use config::{Mode, RawConfig, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration: exit status 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// Property or convergence failure: exit status 1.
    #[error("{0}")]
    Failure(String),
    /// File-system trouble: exit status 1.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<normsol::SolverError> for CliError {
    fn from(e: normsol::SolverError) -> Self {
        match e {
            normsol::SolverError::InvalidArgument(m) => CliError::Config(m),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
