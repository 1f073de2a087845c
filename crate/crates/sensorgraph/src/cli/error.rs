use sensorgraph_core::Error;

use crate::config::ConfigError;
use crate::formats::FileError;
use crate::report::ReportError;

/// A failed command, carrying its process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configuration or inputs that make no sense together.
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Parse(String),
    /// Motions that cannot determine the hand-eye transform.
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Disconnected(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Io(_) => 4,
            CliError::Disconnected(_) => 5,
            CliError::Solver(_) => 6,
        }
    }

    pub fn io(what: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{what}: {e}"))
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Io { .. } => CliError::Io(e.to_string()),
            FileError::Parse { .. } => CliError::Parse(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let mut root = &e;
        while let Error::LeaveOneOut { source, .. } = root {
            root = source;
        }
        match root {
            Error::InsufficientMotion(_)
            | Error::UnderConstrained { .. }
            | Error::TooFewSamples { .. } => CliError::Degenerate(message),
            Error::Disconnected { .. } => CliError::Disconnected(message),
            Error::NumericalFailure(_)
            | Error::NonConvergence { .. }
            | Error::AmbiguousBranch { .. } => CliError::Solver(message),
            _ => CliError::Invalid(message),
        }
    }
}
