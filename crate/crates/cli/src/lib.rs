//! Command-line front end for `purent-core`: JSON state files, bound
//! reports, the Horodecki sweep and the random-state benchmarks.

pub mod commands;
pub mod state_file;

use purent_core::Error;

/// Failure of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(m) => CliError::Solver(m),
            other => CliError::Input(other.to_string()),
        }
    }
}
