//! Linearized interaction matrices around a steady comb.
//!
//! Fluctuations `δa` about the classical spectrum `A` obey
//! `dδa/dt = −γ δa − i G δa − i F δa†` with
//!
//! ```text
//! G_jk = (Δ_eff + d̂_int(j)) δ_jk − 2 Σ_m A*_m A_{m+j−k}
//! F_jk = − Σ_{m+n=j+k} A_m A_n            (+ iν on the j+k=0 anti-diagonal
//!                                          from the stationary pumps)
//! ```
//!
//! The signs are pinned by requiring that the quadrature generator `M − Γ`
//! equals the Jacobian of the classical right-hand side at the same state;
//! [`jacobian_check`] verifies this against central finite differences. The
//! stationary pumps enter the default assembly only through their parametric
//! drive (the `iν` anti-diagonal); [`build_gf`] on a pump-injected spectrum
//! additionally produces the single-pump degenerate and Bragg terms.
//!
//! `M` is the real 2N×2N quadrature generator
//!
//! ```text
//! M = [  Im(G+F)   Re(G−F) ]
//!     [ −Re(G+F)  −Im(G+F)ᵀ ]
//! ```
//!
//! which satisfies the Hamiltonian-matrix identity `MΩ + ΩMᵀ = 0`.

use crate::field::FieldState;
use crate::grid::NormalizedParams;
use crate::mean_field::pdnlse_rhs;
use crate::field::Fourier;
use crate::{C64, Error, Result};
use faer::Mat;

/// Steady comb with classical pump amplitudes injected at μ = ±p.
///
/// The pump product is fixed by the drive: `A_{+p}·A_{−p} = −iν/2`, so that
/// the pump-pair contribution to `F` reproduces `+ν E*` in the linearized
/// dynamics. Both pumps carry equal magnitude `√(|ν|/2)` and the common
/// phase `arg(ν)/2 − π/4`.
#[derive(Debug, Clone)]
pub struct PumpedSpectrum {
    amplitudes: Vec<C64>,
    pub pump_mode_index: i32,
    pub pump_amplitudes: (C64, C64),
}

impl PumpedSpectrum {
    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// Pump amplitudes `(A_{+p}, A_{−p})` realizing `A_{+p} A_{−p} = −iν/2`.
pub fn pump_amplitudes(nu: C64) -> (C64, C64) {
    let mag = (nu.norm() / 2.0).sqrt();
    let phase = nu.arg() / 2.0 - std::f64::consts::FRAC_PI_4;
    let a = C64::from_polar(mag, phase);
    (a, a)
}

/// Inject the stationary pumps into a steady comb spectrum.
///
/// Errors when the comb already carries non-negligible amplitude at a pump
/// mode (the stationary-pump ansatz requires spectral separation).
pub fn assemble_pumped_spectrum(steady: &FieldState, p: &NormalizedParams) -> Result<PumpedSpectrum> {
    let grid = p.grid();
    if steady.grid() != grid {
        return Err(Error::GridMismatch { expected: grid.len(), got: steady.grid().len() });
    }
    let mut amplitudes = steady.spectrum().to_vec();
    let (ap, am) = pump_amplitudes(p.nu);
    let overlap_threshold = 1e-3 * (1.0 + steady.norm());
    for (mu, amp) in [(p.pump_mode_index, ap), (-p.pump_mode_index, am)] {
        let idx = grid.index_of(mu).ok_or_else(|| {
            Error::bad_param("pump_mode_index", format!("pump mode {mu} off the grid"))
        })?;
        let comb_amp = amplitudes[idx].norm();
        if comb_amp > overlap_threshold {
            return Err(Error::PumpOverlap { mu, amplitude: comb_amp });
        }
        amplitudes[idx] = amp;
    }
    Ok(PumpedSpectrum { amplitudes, pump_mode_index: p.pump_mode_index, pump_amplitudes: (ap, am) })
}

/// Hermitian `G` and symmetric `F` of the linearized dynamics.
#[derive(Debug, Clone)]
pub struct InteractionMatrices {
    pub g: Mat<C64>,
    pub f: Mat<C64>,
}

impl InteractionMatrices {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    /// Largest deviation from `G = G†`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.g[(j, k)] - self.g[(k, j)].conj()).norm());
            }
        }
        worst
    }

    /// Largest deviation from `F = Fᵀ`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.f[(j, k)] - self.f[(k, j)]).norm());
            }
        }
        worst
    }
}

/// Truncated autocorrelation `g(d) = Σ_m A*_m A_{m+d}`; (m, n) pairs leaving
/// the grid are dropped, no wraparound.
fn autocorrelation(a: &[C64]) -> Vec<C64> {
    let n = a.len();
    let mut out = vec![C64::new(0.0, 0.0); 2 * n - 1];
    for (di, o) in out.iter_mut().enumerate() {
        let d = di as isize - (n as isize - 1);
        let lo = 0.max(-d) as usize;
        let hi = n - d.max(0) as usize;
        let mut acc = C64::new(0.0, 0.0);
        for m in lo..hi {
            acc += a[m].conj() * a[(m as isize + d) as usize];
        }
        *o = acc;
    }
    out
}

/// Truncated autoconvolution `f(s) = Σ_{m+n=s} A_m A_n` in index space.
fn autoconvolution(a: &[C64]) -> Vec<C64> {
    let n = a.len();
    let mut out = vec![C64::new(0.0, 0.0); 2 * n - 1];
    for (s, o) in out.iter_mut().enumerate() {
        let lo = s.saturating_sub(n - 1);
        let hi = s.min(n - 1);
        let mut acc = C64::new(0.0, 0.0);
        for m in lo..=hi {
            acc += a[m] * a[s - m];
        }
        *o = acc;
    }
    out
}

fn gf_from_amplitudes(
    amplitudes: &[C64],
    p: &NormalizedParams,
    drive_anti_diagonal: bool,
) -> InteractionMatrices {
    let n = amplitudes.len();
    let auto_g = autocorrelation(amplitudes);
    let auto_f = autoconvolution(amplitudes);
    let mut g = Mat::<C64>::zeros(n, n);
    let mut f = Mat::<C64>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let d = (j as isize - k as isize) + (n as isize - 1);
            g[(j, k)] = -2.0 * auto_g[d as usize];
            f[(j, k)] = -auto_f[j + k];
        }
        g[(j, j)] += C64::new(p.delta_eff + p.d_int()[j], 0.0);
    }
    if drive_anti_diagonal {
        let grid = p.grid();
        let i_nu = C64::new(0.0, 1.0) * p.nu;
        for j in 0..n {
            if let Some(k) = grid.conjugate_index(j) {
                f[(j, k)] += i_nu;
            }
        }
    }
    InteractionMatrices { g, f }
}

/// Interaction matrices for the default pipeline: full Kerr convolutions of
/// the comb plus the parametric-drive anti-diagonal from the stationary
/// pumps. Pump cross-phase shifts are already inside Δ_eff.
pub fn interaction_matrices(steady: &FieldState, p: &NormalizedParams) -> Result<InteractionMatrices> {
    let grid = p.grid();
    if steady.grid() != grid {
        return Err(Error::GridMismatch { expected: grid.len(), got: steady.grid().len() });
    }
    Ok(gf_from_amplitudes(steady.spectrum(), p, true))
}

/// Interaction matrices from the raw convolutions of a pump-injected
/// spectrum.
///
/// Every product pair of the stored amplitudes contributes, so the pump pair
/// reproduces the `iν` anti-diagonal and the single-pump degenerate terms at
/// `j + k = ±2p` and pump Bragg terms at `j − k = ±2p` appear as well. The
/// pump-pump cross-phase diagonal is removed (it is part of Δ_eff).
pub fn build_gf(pumped: &PumpedSpectrum, p: &NormalizedParams) -> Result<InteractionMatrices> {
    let grid = p.grid();
    if pumped.amplitudes.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: pumped.amplitudes.len() });
    }
    let mut gf = gf_from_amplitudes(&pumped.amplitudes, p, false);
    let (ap, am) = pumped.pump_amplitudes;
    let xpm = 2.0 * (ap.norm_sqr() + am.norm_sqr());
    let n = grid.len();
    for j in 0..n {
        gf.g[(j, j)] += C64::new(xpm, 0.0);
    }
    Ok(gf)
}

/// Real 2N×2N quadrature generator (loss excluded).
#[derive(Debug, Clone)]
pub struct ModeInteractionMatrix {
    m: Mat<f64>,
}

impl ModeInteractionMatrix {
    /// Number of optical modes N (the matrix is 2N×2N).
    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> Mat<f64> {
        self.m
    }

    /// `‖MΩ + ΩMᵀ‖_max` with `Ω = [[0, I], [−I, 0]]`.
    pub fn hamiltonian_residual(&self) -> f64 {
        let n = self.n_modes();
        let m = &self.m;
        let mut worst = 0.0f64;
        // (MΩ)_{ab} = Σ_c M_{ac} Ω_{cb};  Ω maps column p_j → x_j and x_j → −p_j
        for a in 0..2 * n {
            for b in 0..2 * n {
                let m_omega = if b < n { -m[(a, b + n)] } else { m[(a, b - n)] };
                let omega_mt = if a < n { m[(b, a + n)] } else { -m[(b, a - n)] };
                worst = worst.max((m_omega + omega_mt).abs());
            }
        }
        worst
    }
}

/// Assemble `M` from `(G, F)`, rejecting inputs that are not Hermitian /
/// symmetric within 1e-12 of their scale.
pub fn assemble_m(gf: &InteractionMatrices) -> Result<ModeInteractionMatrix> {
    let n = gf.n();
    let scale = {
        let mut s = 1.0f64;
        for j in 0..n {
            for k in 0..n {
                s = s.max(gf.g[(j, k)].norm()).max(gf.f[(j, k)].norm());
            }
        }
        s
    };
    let herm = gf.hermiticity_residual();
    if herm > 1e-12 * scale {
        return Err(Error::BadStructure { what: "G (Hermitian)", deviation: herm });
    }
    let sym = gf.symmetry_residual();
    if sym > 1e-12 * scale {
        return Err(Error::BadStructure { what: "F (symmetric)", deviation: sym });
    }
    let mut m = Mat::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let gpf = gf.g[(j, k)] + gf.f[(j, k)];
            let gmf = gf.g[(j, k)] - gf.f[(j, k)];
            m[(j, k)] = gpf.im;
            m[(j, n + k)] = gmf.re;
            m[(n + j, k)] = -gpf.re;
            // −Im(G+F)ᵀ
            m[(n + j, n + k)] = -(gf.g[(k, j)] + gf.f[(k, j)]).im;
        }
    }
    Ok(ModeInteractionMatrix { m })
}

/// Pipeline shorthand: steady comb → M with the drive anti-diagonal.
pub fn mode_interaction_matrix(steady: &FieldState, p: &NormalizedParams) -> Result<ModeInteractionMatrix> {
    assemble_m(&interaction_matrices(steady, p)?)
}

/// Compare `M − Γ` against the central-difference Jacobian of the classical
/// right-hand side in quadrature coordinates.
///
/// Returns `max|(M−Γ) − J| / max|J|` over the compared entries. Rows and
/// columns of the pump modes ±p are excluded (their classical dynamics is
/// not part of the reduced equation), as are entries whose four-wave sums
/// leave the grid: the spectral right-hand side aliases those products while
/// the interaction matrices drop them, so only entries with
/// `|μ_j ∓ μ_k| < N − 2W` (W = comb support radius) are comparable. When
/// `residual_tol` is given, the state must satisfy ‖rhs‖/‖E‖ ≤ tol first.
pub fn jacobian_check(
    m: &ModeInteractionMatrix,
    steady: &FieldState,
    p: &NormalizedParams,
    residual_tol: Option<f64>,
) -> Result<f64> {
    let grid = p.grid();
    let n = grid.len();
    if m.n_modes() != n || steady.grid() != grid {
        return Err(Error::GridMismatch { expected: n, got: m.n_modes() });
    }
    let fourier = Fourier::new(grid);
    if let Some(tol) = residual_tol {
        let rhs = pdnlse_rhs(steady, p, &fourier)?;
        let rhs_norm = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let rel = rhs_norm / steady.norm().max(1e-12);
        if rel > tol {
            return Err(Error::NoConvergence {
                what: "jacobian_check",
                message: format!("state is not a fixed point: relative residual {rel:.3e} > {tol:.3e}"),
            });
        }
    }
    let h = 1e-6;
    let mut jac = Mat::<f64>::zeros(2 * n, 2 * n);
    let mut probe = steady.spectrum().to_vec();
    for dir in 0..2 * n {
        let mode = dir % n;
        let delta = if dir < n { C64::new(h, 0.0) } else { C64::new(0.0, h) };
        probe[mode] += delta;
        let plus = pdnlse_rhs(&FieldState::new(probe.clone(), 0.0, grid)?, p, &fourier)?;
        probe[mode] -= 2.0 * delta;
        let minus = pdnlse_rhs(&FieldState::new(probe.clone(), 0.0, grid)?, p, &fourier)?;
        probe[mode] += delta;
        for row in 0..n {
            let dv = (plus[row] - minus[row]) / (2.0 * h);
            jac[(row, dir)] = dv.re;
            jac[(n + row, dir)] = dv.im;
        }
    }
    let pump_rows: Vec<usize> = [p.pump_mode_index, -p.pump_mode_index]
        .iter()
        .filter_map(|&mu| grid.index_of(mu))
        .collect();
    let pump_excluded = |idx: usize| pump_rows.iter().any(|&r| idx % n == r);
    // comb support radius: modes carrying more than 1e-7 of the peak amplitude
    let peak = steady.spectrum().iter().map(|a| a.norm()).fold(0.0f64, f64::max);
    let support = steady
        .spectrum()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 1e-7 * peak)
        .map(|(i, _)| grid.mu_at(i).unsigned_abs())
        .max()
        .unwrap_or(0) as i64;
    let alias_free = n as i64 - 2 * support;
    let mm = m.matrix();
    let mut deviation = 0.0f64;
    let mut scale = 0.0f64;
    for a in 0..2 * n {
        if pump_excluded(a) {
            continue;
        }
        let mu_a = grid.mu_at(a % n) as i64;
        for b in 0..2 * n {
            if pump_excluded(b) {
                continue;
            }
            let mu_b = grid.mu_at(b % n) as i64;
            if (mu_a - mu_b).abs() >= alias_free || (mu_a + mu_b).abs() >= alias_free {
                continue;
            }
            let loss = if a == b { p.gamma_total } else { 0.0 };
            deviation = deviation.max((mm[(a, b)] - loss - jac[(a, b)]).abs());
            scale = scale.max(jac[(a, b)].abs());
        }
    }
    Ok(deviation / scale.max(1.0))
}
