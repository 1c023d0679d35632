use thiserror::Error;

/// Errors raised by the engine, the special functions and the quadrature layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// p = 0: a particle at rest never reaches the arrival point.
    #[error("momentum singularity: p = 0")]
    MomentumSingularity,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("convergence error: {what} did not converge after {terms} terms")]
    Convergence { what: String, terms: usize },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
