use thiserror::Error;

/// Errors raised by matrix construction, factorization and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("data length {got} does not match {rows}x{cols}")]
    InvalidLength {
        rows: usize,
        cols: usize,
        got: usize,
    },

    #[error("invalid value {value} at ({row}, {col}): entries must be finite and nonnegative")]
    InvalidValue { row: usize, col: usize, value: f64 },

    #[error("{0}: input has missing entries")]
    MissingEntries(&'static str),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0}")]
    Undefined(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
