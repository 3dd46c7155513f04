use thiserror::Error;

use crate::spaces::Space;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have dimension >= 1")]
    EmptyMatrix,

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive definite (lambda_min = {min:e}, lambda_max = {max:e})")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("matrix is ill-conditioned (cond = {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("vector lives in the {found} space, expected {expected}")]
    SpaceMismatch { expected: Space, found: Space },

    #[error("basis is not orthonormal (Gram defect {defect:e})")]
    BasisNotOrthonormal { defect: f64 },

    #[error("time {t} outside schedule span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("no oracle available: {0}")]
    OracleUnavailable(String),

    #[error("convergence order not measurable: {0}")]
    NotMeasurable(String),

    #[error("no diagnostics rows to judge")]
    EmptyRows,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scenario: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn at(self, t: f64) -> Error {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                t,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with any time annotation stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            e => e,
        }
    }

    /// Time at which the error was raised, when known.
    pub fn time(&self) -> Option<f64> {
        match self {
            Error::AtTime { t, .. } => Some(*t),
            _ => None,
        }
    }
}
