//! Closed-form below-threshold pair spectra.
