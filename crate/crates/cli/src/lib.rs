//! Library side of the `qfilter` command-line tool: configuration,
//! figure tables and the filter/crosscheck/state commands.

pub mod commands;
pub mod config;
pub mod figures;
pub mod table;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] qfilter::Error),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Core(_) => EXIT_INPUT,
            CliError::Tolerance(_) => EXIT_TOLERANCE,
            CliError::Io(_) | CliError::Csv(_) => EXIT_RUNTIME,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
