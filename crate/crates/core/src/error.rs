use thiserror::Error;

use crate::estimators::Degenerate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyData,
    #[error("invalid fraction: {0}")]
    InvalidFraction(String),
    #[error("index {index} out of range for dataset of {len} samples")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("duplicate index {0}")]
    DuplicateIndex(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid sample {index}: {reason}")]
    InvalidSample { index: usize, reason: String },
    #[error("treatment has no variation: {0}")]
    NoVariation(String),
    #[error(transparent)]
    Degenerate(#[from] Degenerate),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid synthetic model: {0}")]
    InvalidModel(String),
    #[error("csv error at row {row}, column {column}: {message}")]
    Csv {
        row: usize,
        column: String,
        message: String,
    },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no leaf could be evaluated ({skipped} skipped)")]
    NoEvaluableLeaf { skipped: usize },
    #[error("leaf {0} has no p-value; run pruning first")]
    MissingPValue(usize),
    #[error("covariance matrix is singular after regularization")]
    SingularCovariance,
    #[error("corrupt tree file: {0}")]
    CorruptTree(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by bad user input rather than a failure at run time.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::EmptyData
                | Error::NoVariation(_)
                | Error::InvalidFraction(_)
                | Error::IndexOutOfRange { .. }
                | Error::DuplicateIndex(_)
                | Error::DimensionMismatch { .. }
                | Error::InvalidSample { .. }
                | Error::InvalidConfig(_)
                | Error::InvalidModel(_)
                | Error::Csv { .. }
                | Error::LengthMismatch(..)
                | Error::CorruptTree(_)
        )
    }
}
