use std::path::PathBuf;

use series_invert::{ExpandError, OracleError, ParseError, ReversionError, SmoothError};
use thiserror::Error;

/// Failures of a command, each mapped to a stable process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    NotRevertible(String),
    #[error("{0}")]
    IllConditioned(String),
    #[error("algorithms disagree: {0}")]
    Disagreement(String),
    #[error("{0}")]
    OracleFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotRevertible(_) | CliError::IllConditioned(_) => 2,
            CliError::Parse(_) | CliError::Io { .. } | CliError::Input(_) => 3,
            CliError::Disagreement(_) => 4,
            CliError::OracleFailure(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Io { .. } => "IoError",
            CliError::Input(_) => "InputError",
            CliError::NotRevertible(_) => "NotRevertible",
            CliError::IllConditioned(_) => "IllConditionedJet",
            CliError::Disagreement(_) => "Disagreement",
            CliError::OracleFailure(_) => "OracleFailure",
        }
    }
}

impl From<ReversionError> for CliError {
    fn from(e: ReversionError) -> Self {
        match e {
            ReversionError::NotRevertible => CliError::NotRevertible(e.to_string()),
            ReversionError::NonConvergence { .. } => CliError::Disagreement(e.to_string()),
            ReversionError::InsufficientOrder { .. } | ReversionError::Series(_) => {
                CliError::Input(e.to_string())
            }
        }
    }
}

impl From<SmoothError> for CliError {
    fn from(e: SmoothError) -> Self {
        match e {
            SmoothError::NotRevertible(_) => CliError::NotRevertible(e.to_string()),
            SmoothError::IllConditionedJet { .. } => CliError::IllConditioned(e.to_string()),
            SmoothError::Oracle(_) => CliError::OracleFailure(e.to_string()),
            SmoothError::Reversion(inner) => inner.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::OracleFailure(e.to_string())
    }
}

impl From<ExpandError> for CliError {
    fn from(e: ExpandError) -> Self {
        CliError::Input(e.to_string())
    }
}
