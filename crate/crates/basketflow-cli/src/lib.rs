//! Library side of the `basketflow` binary: phase-file formats, pipeline
//! configuration, orchestration, and the subcommand implementations.
//!
//! Exit codes: 0 success, 2 usage error, 3 input/parse error, 4 empty result
//! (no sessions or no edges), 5 internal invariant violation.

use thiserror::Error;

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod pipeline;

/// CLI-level error, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Empty(String),
    #[error("{0}")]
    Internal(String),
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Empty(_) => EXIT_EMPTY,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<basketflow::Error> for CliError {
    fn from(err: basketflow::Error) -> Self {
        use basketflow::Error as E;
        match err {
            E::InvalidParam { .. } => CliError::Usage(err.to_string()),
            E::Io(_) | E::Format(_) | E::UnknownNode(_) | E::IsolatedNode(_) => CliError::Input(err.to_string()),
            E::NoEdges | E::EmptyGraph => CliError::Empty(err.to_string()),
            E::InvalidPartition(_) | E::Disconnected | E::ExhaustiveLimit { .. } => {
                CliError::Internal(err.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Input(format!("invalid JSON: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
