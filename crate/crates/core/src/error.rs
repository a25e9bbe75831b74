use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("header does not match schema: {0}")]
    HeaderMismatch(String),

    #[error("line {line}, column `{column}`: cannot parse `{token}` as a number")]
    ParseNumber {
        line: u64,
        column: String,
        token: String,
    },

    #[error("no usable rows ({dropped} dropped for missing values)")]
    NoRows { dropped: usize },

    #[error("line {line}: missing value in numeric column `{column}`")]
    MissingNumeric { line: u64, column: String },

    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: u64, label: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("model file: {0}")]
    Model(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
