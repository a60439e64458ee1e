//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file contents (bad magic, truncated payload, bad manifest).
    #[error("format error: {0}")]
    Format(String),

    /// Structurally valid input carrying unusable values (NaN/Inf payloads).
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Caller violated an operation precondition.
    #[error("argument error: {0}")]
    Argument(String),

    /// Tensor dimensions incompatible with the requested operation.
    #[error("shape error: {0}")]
    Shape(String),

    /// Input is degenerate for the requested statistic (e.g. zero variance).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// No trajectory satisfies the requested constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Invariant breakage inside the crate itself.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for CLI use: usage errors exit 2, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
