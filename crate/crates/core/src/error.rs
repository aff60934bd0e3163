use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {threshold:e}")]
    NotHermitian { asymmetry: f64, threshold: f64 },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("eigensolver did not converge for a {0}x{0} matrix")]
    Eigensolver(usize),

    #[error("moment table has order {have}, need at least {need}")]
    InsufficientMoments { have: usize, need: usize },

    #[error("closed form inapplicable: h1*h3 - h2^2 = {0:e} is degenerate")]
    DegenerateMoments(f64),

    #[error("time grid must start at 0 and be strictly increasing")]
    InvalidTimeGrid,

    #[error("integrator failed at t = {time}: {reason}")]
    Integrator { time: f64, reason: String },

    #[error("least-squares solve failed: {0}")]
    LeastSquares(String),

    #[error("projector basis is not orthonormal (deviation {0:e})")]
    NonOrthonormalBasis(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
