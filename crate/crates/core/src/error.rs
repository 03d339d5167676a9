use thiserror::Error;

use crate::parser::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {degree} exceeds the maximum supported degree {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("polynomial is not Hermitian (max asymmetry {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("non-finite coefficient at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("modulus N must be a positive integer")]
    InvalidModulus,

    #[error("{samples} samples is too few, at least {min} are required")]
    TooFewSamples { samples: usize, min: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{0}")]
    Domain(String),

    #[error("block diagonal {k} is out of range for block degree {m}")]
    DiagonalOutOfRange { k: i64, m: usize },

    #[error("block Toeplitz matrix is not positive semidefinite (smallest eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("no convergence after {iters} iterations (best residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("inconsistent numerical state: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}
