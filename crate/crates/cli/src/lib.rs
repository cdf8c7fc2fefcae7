//! Config-driven experiment runner behind the `blaschke` binary.

pub mod config;
pub mod output;
pub mod run;

use blaschke_core::error::Error as CoreError;

pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config, bad input values, or a plot kind the command cannot produce.
    #[error("schema error: {0}")]
    Schema(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Numerical(_) => EXIT_NONCONVERGENCE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(_) | CoreError::Csv(_) => CliError::Io(e.to_string()),
            ref n if n.is_numerical() => CliError::Numerical(e.to_string()),
            _ => CliError::Schema(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
