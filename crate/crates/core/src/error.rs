use thiserror::Error;

/// Errors raised by the simulation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied argument is out of its valid domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A model configuration is internally inconsistent.
    #[error("invalid configuration: {0}")]
    Configuration(String),
    /// The input admits no valid estimate (e.g. no sample positions).
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Configuration(msg.into()))
}
