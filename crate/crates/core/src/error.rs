use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight {numerator}/{denominator} is not strictly between 0 and 1")]
    WeightOutOfRange { numerator: u64, denominator: u64 },

    #[error("cannot parse weight {input:?}: {reason}")]
    WeightParse { input: String, reason: String },

    #[error("schedule depth must be at least 1")]
    ZeroDepth,

    #[error("schedule depth {depth} exceeds the supported maximum {max}")]
    DepthTooLarge { depth: usize, max: usize },

    #[error("scalar inputs must be positive and finite, got a={a}, b={b}")]
    NonPositiveScalar { a: f64, b: f64 },

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("matrix has a non-finite entry")]
    NonFiniteEntry,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: ||A - A*|| = {asymmetry:e} exceeds {bound:e}")]
    NotHermitian { asymmetry: f64, bound: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("Hermitian eigensolver did not converge within {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("eigendecomposition residual {residual:e} exceeds {bound:e}")]
    EigenInaccurate { residual: f64, bound: f64 },

    #[error("function is undefined at eigenvalue {eigenvalue}")]
    Domain { eigenvalue: f64 },

    #[error("matrix {which} is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite {
        which: &'static str,
        min_eigenvalue: f64,
    },

    #[error("matrix {which} is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite {
        which: &'static str,
        min_eigenvalue: f64,
    },

    #[error("schedule weight {schedule} differs from instance weight {instance}")]
    WeightMismatch { schedule: String, instance: String },

    #[error("matrix text: {0}")]
    MatrixText(String),
}
