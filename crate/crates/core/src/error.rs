use thiserror::Error;

/// Errors produced by the simulator and the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates a model constraint. The message names it.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A numerical routine failed to reach its tolerance or left its valid range.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The phase of a zero complex number was requested.
    #[error("undefined phase: cannot quantize the phase of zero")]
    UndefinedPhase,
    /// A CSV artifact does not match the expected schema.
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Schema(e.to_string())
    }
}
