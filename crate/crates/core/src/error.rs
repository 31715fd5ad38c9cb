use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid value at row {row}, column `{column}`: {message}")]
    Validation {
        row: usize,
        column: String,
        message: String,
    },

    #[error("reference table is empty")]
    EmptyTable,

    #[error("size error: {0}")]
    Size(String),

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("query error: {0}")]
    Query(String),

    #[error("transform error on parameter `{param}`: {message}")]
    Transform { param: String, message: String },

    #[error("resimulation failed for particle {index}: {message}")]
    Resimulation { index: usize, message: String },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Usage and configuration problems, as opposed to failures of a
    /// statistical run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::Validation { .. }
                | Error::EmptyTable
                | Error::Size(_)
                | Error::Spec(_)
                | Error::Dimension { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Io { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
