use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("index {index} out of range for a chain of {len} ions")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("equilibrium solver did not converge after {iterations} iterations (best residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("time step {dt:e} exceeds the resolution limit {limit:e} (0.1/omega0)")]
    StepSize { dt: f64, limit: f64 },

    #[error("integration lost accuracy: norm drift {drift:e} exceeds {limit:e}")]
    Accuracy { drift: f64, limit: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("root solve failed: {0}")]
    RootSolve(String),
}

impl Error {
    /// True for failures of a numerical method, as opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SolverFailure { .. } | Error::Accuracy { .. } | Error::Fit(_) | Error::RootSolve(_))
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }
}

/// Rejects values that are not finite and strictly positive.
pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {value}")))
    }
}
