use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value failed validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative solver exhausted its budget. Carries the last residuals
    /// so the failure is diagnosable instead of a silent best effort.
    #[error("solver did not converge: {context} (residuals {psi1:.3e}, {psi2:.3e})")]
    NoConvergence {
        context: String,
        psi1: f64,
        psi2: f64,
    },

    /// A genericity assumption needed by the binary-action solution fails.
    #[error("genericity violated: {0}")]
    Genericity(String),

    /// A precondition on a certified object does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Something that should be impossible given validated inputs.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
