use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numeric,
    Internal,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Data => "data",
            ErrorCategory::Numeric => "numeric",
            ErrorCategory::Internal => "internal",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: expected {expected}, got {actual}")]
    Shape {
        op: &'static str,
        expected: String,
        actual: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: {detail}")]
    Divergence {
        epoch: usize,
        batch: usize,
        detail: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cannot stratify: {0}")]
    Stratification(String),

    #[error("infeasible synthetic specification: {0}")]
    Specification(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv at line {line}: {detail}")]
    MalformedRow { line: u64, detail: String },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("cannot parse `{value}` at row {row}, column `{column}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("internal consistency: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn shape(op: &'static str, expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Error::Shape {
            op,
            expected: expected.into(),
            actual: actual.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::Specification(_) => ErrorCategory::Config,
            Error::Shape { .. }
            | Error::InsufficientData(_)
            | Error::Stratification(_)
            | Error::Undefined(_)
            | Error::Io { .. }
            | Error::MalformedRow { .. }
            | Error::UnknownColumn(_)
            | Error::Parse { .. }
            | Error::Checkpoint(_) => ErrorCategory::Data,
            Error::NonFinite(_) | Error::Divergence { .. } => ErrorCategory::Numeric,
            Error::Internal(_) => ErrorCategory::Internal,
        }
    }
}
