//! Numerical core for parametrically driven Kerr cavity solitons (PDCS).
//!
//! The pipeline goes from mean-field steady states of the parametrically
//! driven nonlinear Schrödinger equation, through the linearized multimode
//! quadrature dynamics, to input-output transfer functions, Bloch–Messiah
//! decompositions, loss-degraded squeezing spectra, supermodes and the
//! intracavity temporal noise envelope.
//!
//! Modules mirror the stages of that pipeline:
//!
//! * [`grid`] — mode grid, physical parameters and normalized dispersion
//! * [`mean_field`] — split-step integration, steady states, regime labels
//! * [`linearize`] — interaction matrices `G`, `F` and the real generator `M`
//! * [`squeezing`] — transfer function `S(ω)`, Bloch–Messiah, loss, supermodes
//! * [`oracle`] — closed-form below-threshold pair spectra and phase matching
//! * [`temporal`] — annihilation-basis transfer and azimuthal noise envelope

pub mod error;
pub mod grid;
pub mod field;
pub mod mean_field;
pub mod linearize;
pub mod squeezing;
pub mod oracle;
pub mod temporal;

pub use error::Error;
pub use grid::{ModeGrid, NormalizedParams, PhysicalParams};
pub use field::FieldState;
pub use mean_field::{Integrator, RegimeLabel};
pub use linearize::{InteractionMatrices, ModeInteractionMatrix, PumpedSpectrum};
pub use squeezing::{FrequencyDecomposition, LossChannels, SqueezingSpectrum, Supermode};

/// Convenience alias used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Result alias bound to the crate error type.
pub type Result<T> = std::result::Result<T, Error>;
