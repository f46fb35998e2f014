use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative radius {0}")]
    NegativeRadius(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate:e}, error {error:e})")]
    Quadrature { a: f64, b: f64, estimate: f64, error: f64 },

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("tensor invariant violated: {0}")]
    TensorInvariant(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("rank deficient system: {0}")]
    RankDeficient(String),

    #[error("region invariant violated at x = ({x1}, {x2}), alpha = {alpha}")]
    RegionViolation { x1: f64, x2: f64, alpha: f64 },

    #[error("lambda = {0} is not positive")]
    NonPositiveLambda(f64),

    #[error("graph too large for exhaustive search: {0} vertices")]
    GraphTooLarge(usize),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
