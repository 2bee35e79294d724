use std::io;

/// Errors produced by every stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter violates its contract.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Input data is structurally valid but inconsistent (length mismatch, truncated body).
    #[error("corrupt input: {0}")]
    CorruptInput(String),
    /// Input could not be parsed at all.
    #[error("format error: {0}")]
    Format(String),
    /// Two artifacts disagree with each other (index out of range, config hash mismatch).
    #[error("consistency error: {0}")]
    Consistency(String),
    /// An internal invariant was broken by the caller's data.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parameter(_) => ErrorKind::Config,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
