use thiserror::Error;

/// Errors raised by the QLBE numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QlbeError {
    /// An argument lies outside the domain where the relation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must agree (dimensions, grids, masses) do not.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A configuration is inconsistent with the grid or with itself.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Gas mixtures are only supported for a common molecular mass.
    #[error("unsupported mixture: {0}")]
    UnsupportedMixture(String),

    /// A quadrature failed its own convergence or resolution check.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// A monitored evolution left its validity region.
    #[error("run invalidated at t = {time:e}: {reason}")]
    RunInvalidated { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, QlbeError>;

pub(crate) fn domain(msg: impl Into<String>) -> QlbeError {
    QlbeError::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> QlbeError {
    QlbeError::ContractViolation(msg.into())
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {value}")))
    }
}
