use thiserror::Error;

/// Errors raised by constructors and operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry count {found} does not match {rows}x{cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        found: usize,
    },

    #[error("not Hermitian: max |m_ij - conj(m_ji)| = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("trace is not one: |Tr - 1| = {residual:e}")]
    TraceNotOne { residual: f64 },

    #[error("not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("kets are not orthonormal: max |<i|j> - delta_ij| = {residual:e}")]
    NotOrthonormal { residual: f64 },

    #[error("POVM elements do not sum to identity: max residual {residual:e}")]
    IncompletePovm { residual: f64 },

    #[error("POVM has no elements")]
    EmptyPovm,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dimension must be at least one")]
    ZeroDimension,

    #[error("operation requires dimension {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("singular overlap |<b|a>| = {overlap:e} at (a={a}, b={b}); reconstruction impossible")]
    SingularOverlap { a: usize, b: usize, overlap: f64 },

    #[error("parameter vector has length {found}, expected {expected}")]
    BadParamLength { expected: usize, found: usize },

    #[error("postselection probability {probability:e} is too small; weak value undefined")]
    ZeroPostselection { probability: f64 },

    #[error("no optimizer restart converged ({restarts} restarts)")]
    OptimizerFailure { restarts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in input: {0}")]
    NonFinite(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
