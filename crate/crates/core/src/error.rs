use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the extraction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input out of domain: {0}")]
    InputDomain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid model state: {0}")]
    State(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no input found: {0}")]
    EmptyInput(String),

    #[error("invalid scene spec field `{field}`: {reason}")]
    Spec { field: &'static str, reason: String },

    #[error("failed to read {path}: {reason}")]
    Read { path: PathBuf, reason: String },

    #[error("failed to write {path}: {reason}")]
    Write { path: PathBuf, reason: String },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit codes used by the command-line frontend.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const IO: i32 = 2;
    pub const SHAPE: i32 = 3;
}

impl Error {
    pub(crate) fn read(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Read {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Write {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    /// Stable exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Read { .. }
            | Error::Write { .. }
            | Error::EmptyInput(_)
            | Error::Snapshot(_) => exit_code::IO,
            Error::Shape(_) => exit_code::SHAPE,
            Error::InputDomain(_)
            | Error::InsufficientData(_)
            | Error::State(_)
            | Error::Config(_)
            | Error::Spec { .. } => exit_code::CONFIG,
        }
    }
}
