use std::path::PathBuf;

use polplace::{ErrorClass, PlaceError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {what}: {source}")]
    Json {
        what: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Place(#[from] PlaceError),

    #[error("{0}")]
    Generation(String),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 validation, 3 numerical, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Json { .. } | CliError::Input(_) => 2,
            CliError::Place(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::NonConvergence => 4,
            },
            CliError::Generation(_) | CliError::Output(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
