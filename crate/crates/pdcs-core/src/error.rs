//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation (non-finite, out of range, ...).
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// Two objects were built on different mode grids.
    #[error("mode grid mismatch: expected N = {expected}, got N = {got}")]
    GridMismatch { expected: usize, got: usize },

    /// The field norm exceeded the configured bound during integration.
    #[error("field blow-up at t = {time:.6}: norm = {norm:.3e} exceeds bound {bound:.3e}")]
    BlowUp { time: f64, norm: f64, bound: f64 },

    /// The steady comb carries non-negligible amplitude at a pump mode.
    #[error("comb amplitude {amplitude:.3e} at pump mode μ = {mu} exceeds overlap threshold")]
    PumpOverlap { mu: i32, amplitude: f64 },

    /// A matrix violated a required structural property.
    #[error("{what} violates required structure: deviation {deviation:.3e}")]
    BadStructure { what: &'static str, deviation: f64 },

    /// The resolvent (iωI + Γ − M) is numerically singular.
    #[error("singular linear system at ω = {omega}: residual {residual:.3e}")]
    SingularSystem { omega: f64, residual: f64 },

    /// A dense decomposition did not converge.
    #[error("decomposition failed at ω = {omega}: {message}")]
    DecompositionFailed { omega: f64, message: String },

    /// An iterative procedure did not reach its target.
    #[error("no convergence in {what}: {message}")]
    NoConvergence { what: &'static str, message: String },
}

impl Error {
    pub(crate) fn bad_param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter { name, message: message.into() }
    }
}
