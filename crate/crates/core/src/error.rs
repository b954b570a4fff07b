use thiserror::Error;

/// Errors raised by the numerical kernel and everything built on it.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A function returned a non-finite value while being probed.
    #[error("non-finite value while perturbing coordinate {coordinate}")]
    Evaluation { coordinate: usize },

    #[error("non-finite residual during {context}")]
    NonFinite { context: &'static str },

    /// LU factorisation met a pivot below the relative threshold.
    #[error("singular Jacobian (pivot {pivot:.3e} in row {row})")]
    SingularJacobian { row: usize, pivot: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The point does not satisfy the implicit equations closely enough.
    #[error("point is off the constraint manifold (residual {residual:.3e})")]
    OffManifold { residual: f64 },

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
