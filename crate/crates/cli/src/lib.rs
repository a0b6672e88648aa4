//! Command-line driver: configuration, commands and report emission.

pub mod config;
pub mod run;

use bose_core::Error;

/// Process exit status of a failed run.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Resource(_) => CliError::Validation(e.to_string()),
            Error::Numeric(_) | Error::Domain(_) => CliError::Numeric(e.to_string()),
        }
    }
}
