//! Error type shared by all solvers.

/// Errors reported by grid construction, functional evaluation, and the
/// stationary/evolution solvers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A parameter violates its documented precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two objects that must share a grid or component structure do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An input value lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The eigenvalue search could not bracket a sign change.
    #[error("eigenvalue bracket not found: {0}")]
    BracketNotFound(String),

    /// An iterative solver ran out of iterations.
    #[error("did not converge: {reason} (last residual {last_residual:.3e})")]
    NotConverged { reason: String, last_residual: f64 },

    /// A non-finite number appeared during the computation.
    #[error("numerical blow-up: {0}")]
    NumericalBlowup(String),
}

pub type Result<T> = std::result::Result<T, Error>;
