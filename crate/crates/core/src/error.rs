use thiserror::Error;

/// Errors raised by sequence construction, metrics and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid mask sequence: {0}")]
    InvalidMask(String),

    #[error("Zadoff-Chu unitary matrix requires an even dimension, got {0}")]
    OddZcDimension(usize),

    #[error("column {0} has zero norm")]
    ZeroColumn(usize),

    #[error("PAPR of an all-zero sequence is undefined")]
    ZeroSequence,

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
