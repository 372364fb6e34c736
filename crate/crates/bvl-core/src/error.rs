//! Error type shared by every numerical module.

use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A quadrature or series did not reach its tolerance within budget.
    #[error("accuracy error in {what}: achieved {achieved:e}, requested {requested:e}")]
    Accuracy {
        what: String,
        achieved: f64,
        requested: f64,
    },
    /// An iteration exhausted its budget before converging.
    #[error("no convergence after {iterations} iterations (last iterate {last:e}, residual {residual:e})")]
    Convergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },
    /// Loss of significance or another arithmetic anomaly.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A memory or size budget would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// The semiclassical parameter is too large for the cutoff construction.
    #[error("admissibility error: hbar = {hbar} exceeds {limit} for alpha = {alpha} (cube C(0, 69 hbar^-alpha) must fit strictly inside the dilated cell)")]
    Admissibility { alpha: f64, hbar: f64, limit: f64 },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite, got {x}")))
    }
}
