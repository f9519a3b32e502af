use thiserror::Error;

/// Errors raised by mesh construction, projection, assembly, solve and
/// error measurement.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh size N = {0} must be at least 8 and divisible by 4")]
    InvalidN(usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("point ({x}, {y}) lies outside the unit square")]
    OutOfDomain { x: f64, y: f64 },

    #[error("quadrature with {points} points misses the projection tolerance (discrepancy {discrepancy:.3e})")]
    QuadratureInsufficient { points: usize, discrepancy: f64 },

    #[error("weighted Gram matrix is singular or ill-conditioned (condition number {condition:.3e})")]
    SingularGram { condition: f64 },

    #[error("inconsistent dimensions: {0}")]
    InconsistentDims(String),

    #[error("linear system is singular: {0}")]
    SingularMatrix(String),

    #[error("relative residual {residual:.3e} exceeds 1e-8")]
    ResidualTooLarge { residual: f64 },

    #[error("errors must be positive for a rate estimate (got {e_n}, {e_2n})")]
    NonpositiveError { e_n: f64, e_2n: f64 },

    #[error("fine mesh is not the midpoint bisection of the coarse mesh: {0}")]
    MeshNotNested(String),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
