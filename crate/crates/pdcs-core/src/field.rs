//! Intracavity field state with dual spectral/azimuthal representation.
//!
//! The canonical storage is the mode spectrum `A_μ` in grid order; the
//! azimuthal field on `N` uniform angles is `E(θ_j) = Σ_μ A_μ e^{iμθ_j}`.

use crate::grid::ModeGrid;
use crate::{C64, Error, Result};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// FFT plans tied to one grid size, shareable across threads.
#[derive(Clone)]
pub struct Fourier {
    grid: ModeGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fourier {
    pub fn new(grid: ModeGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.len());
        let inverse = planner.plan_fft_inverse(grid.len());
        Fourier { grid, forward, inverse }
    }

    #[inline]
    pub fn grid(&self) -> ModeGrid {
        self.grid
    }

    /// `E(θ_j) = Σ_μ A_μ e^{iμθ_j}` on the N uniform angles θ_j = 2πj/N.
    pub fn spectrum_to_field(&self, spectrum: &[C64]) -> Vec<C64> {
        let n = self.grid.len();
        debug_assert_eq!(spectrum.len(), n);
        let half = n / 2;
        // unshift: FFT bin k holds mode μ = k (k < N/2) or k − N (k ≥ N/2)
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for (k, b) in buf.iter_mut().enumerate() {
            let mu_idx = if k < half { k + half } else { k - half };
            *b = spectrum[mu_idx];
        }
        self.inverse.process(&mut buf);
        buf
    }

    /// Inverse of [`spectrum_to_field`](Self::spectrum_to_field).
    pub fn field_to_spectrum(&self, field: &[C64]) -> Vec<C64> {
        let n = self.grid.len();
        debug_assert_eq!(field.len(), n);
        let half = n / 2;
        let mut buf = field.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        let mut spectrum = vec![C64::new(0.0, 0.0); n];
        for (k, b) in buf.iter().enumerate() {
            let mu_idx = if k < half { k + half } else { k - half };
            spectrum[mu_idx] = b * scale;
        }
        spectrum
    }
}

/// Complex intracavity envelope on the mode grid at normalized slow time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    spectrum: Vec<C64>,
    pub time: f64,
    grid: ModeGrid,
}

impl FieldState {
    pub fn new(spectrum: Vec<C64>, time: f64, grid: ModeGrid) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::GridMismatch { expected: grid.len(), got: spectrum.len() });
        }
        let state = FieldState { spectrum, time, grid };
        state.check_finite()?;
        Ok(state)
    }

    pub fn vacuum(grid: ModeGrid) -> Self {
        FieldState { spectrum: vec![C64::new(0.0, 0.0); grid.len()], time: 0.0, grid }
    }

    /// Build a state from azimuthal samples `E(θ_j)`.
    pub fn from_field(field: &[C64], time: f64, fourier: &Fourier) -> Result<Self> {
        FieldState::new(fourier.field_to_spectrum(field), time, fourier.grid())
    }

    #[inline]
    pub fn grid(&self) -> ModeGrid {
        self.grid
    }

    #[inline]
    pub fn spectrum(&self) -> &[C64] {
        &self.spectrum
    }

    #[inline]
    pub(crate) fn spectrum_mut(&mut self) -> &mut [C64] {
        &mut self.spectrum
    }

    pub fn to_field(&self, fourier: &Fourier) -> Vec<C64> {
        fourier.spectrum_to_field(&self.spectrum)
    }

    /// `√(Σ_μ |A_μ|²)`; by Parseval this is the RMS of `E(θ)` over the circle.
    pub fn norm(&self) -> f64 {
        self.spectrum.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn check_finite(&self) -> Result<()> {
        for a in &self.spectrum {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::bad_param("field state", "non-finite spectrum entry"));
            }
        }
        Ok(())
    }

    /// Rotate the azimuthal frame by `θ0`: `A_μ → A_μ e^{iμθ0}`.
    pub fn rotated(&self, theta0: f64) -> Self {
        let mut out = self.clone();
        for (i, a) in out.spectrum.iter_mut().enumerate() {
            let mu = self.grid.mu_at(i) as f64;
            *a *= C64::from_polar(1.0, mu * theta0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn single_mode_field_is_plane_wave() {
        let grid = ModeGrid::new(16).unwrap();
        let fourier = Fourier::new(grid);
        let mut spec = vec![C64::new(0.0, 0.0); 16];
        spec[grid.index_of(3).unwrap()] = C64::new(2.0, 0.0);
        let field = fourier.spectrum_to_field(&spec);
        for (j, e) in field.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / 16.0;
            let expect = C64::from_polar(2.0, 3.0 * theta);
            assert_relative_eq!(e.re, expect.re, epsilon = 1e-12);
            assert_relative_eq!(e.im, expect.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn norm_is_parseval_rms() {
        let grid = ModeGrid::new(32).unwrap();
        let fourier = Fourier::new(grid);
        let spec: Vec<C64> =
            (0..32).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let state = FieldState::new(spec, 0.0, grid).unwrap();
        let field = state.to_field(&fourier);
        let rms = (field.iter().map(|e| e.norm_sqr()).sum::<f64>() / 32.0).sqrt();
        assert_relative_eq!(state.norm(), rms, max_relative = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// spectral → azimuthal → spectral reproduces the state to 1e-12.
        #[test]
        fn round_trip(seed in 0u64..1000) {
            let grid = ModeGrid::new(64).unwrap();
            let fourier = Fourier::new(grid);
            let spec: Vec<C64> = (0..64)
                .map(|i| {
                    let x = (seed as f64 + i as f64 * 1.618).sin();
                    let y = (seed as f64 * 0.7 + i as f64 * 2.414).cos();
                    C64::new(x, y)
                })
                .collect();
            let state = FieldState::new(spec.clone(), 0.0, grid).unwrap();
            let back = FieldState::from_field(&state.to_field(&fourier), 0.0, &fourier).unwrap();
            let err: f64 = spec
                .iter()
                .zip(back.spectrum())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            prop_assert!(err / state.norm() < 1e-12);
        }
    }
}
