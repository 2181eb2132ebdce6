use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator is not Hermitian within tolerance (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("quadrature failed to converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("conditioning on a null event: marginal density {0:.3e} below threshold")]
    NullConditioning(f64),

    #[error("unreliable Monte-Carlo estimate: effective sample size {0:.1} < 100")]
    UnreliableEstimate(f64),

    #[error("degenerate conditioning: {0}")]
    DegenerateConditioning(String),

    #[error("filter backend `{0}` cannot be evaluated pointwise")]
    NotPointwiseEvaluable(&'static str),
}
