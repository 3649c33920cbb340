//! Mode grid, physical parameters and the normalized integrated dispersion.
//!
//! All dynamics in this crate run in normalized units: the total amplitude
//! decay rate is 1, slow time is measured in decay times, and the per-mode
//! resonance offsets enter through the normalized integrated dispersion
//! `d̂_int(μ) = Σ_{n≥2} d_n μ^n / n!` with `d_n = t_R · D_n / Γ`,
//! `Γ = π / finesse` and `t_R = 1 / FSR`.

use crate::error::Error;
use crate::Result;
use std::f64::consts::PI;

/// Integer azimuthal mode grid `μ = −N/2 … N/2−1` (N even).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeGrid {
    n: usize,
}

impl ModeGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::bad_param("mode_count", format!("N must be even and ≥ 4, got {n}")));
        }
        Ok(ModeGrid { n })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest mode number on the grid (−N/2).
    #[inline]
    pub fn mu_min(&self) -> i32 {
        -((self.n / 2) as i32)
    }

    /// Largest mode number on the grid (N/2 − 1).
    #[inline]
    pub fn mu_max(&self) -> i32 {
        (self.n / 2) as i32 - 1
    }

    /// Array index of mode `mu`, if on the grid.
    #[inline]
    pub fn index_of(&self, mu: i32) -> Option<usize> {
        if mu < self.mu_min() || mu > self.mu_max() {
            None
        } else {
            Some((mu - self.mu_min()) as usize)
        }
    }

    /// Mode number stored at array index `i`.
    #[inline]
    pub fn mu_at(&self, i: usize) -> i32 {
        debug_assert!(i < self.n);
        i as i32 + self.mu_min()
    }

    /// Iterator over mode numbers in storage order.
    pub fn modes(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.n).map(|i| self.mu_at(i))
    }

    /// Index of the conjugate partner `−μ`, when it lies on the grid.
    ///
    /// The Nyquist mode `μ = −N/2` has no partner and returns `None`.
    #[inline]
    pub fn conjugate_index(&self, i: usize) -> Option<usize> {
        self.index_of(-self.mu_at(i))
    }
}

/// Physical resonator description in SI units.
///
/// Dispersion coefficients are given as ordinary frequencies `D_k / 2π`.
#[derive(Debug, Clone)]
pub struct PhysicalParams {
    pub fsr_hz: f64,
    pub finesse: f64,
    pub d2_hz: f64,
    pub d4_hz: f64,
    /// Kerr coefficient γ in 1/(W·m), used only for field-amplitude scaling.
    pub kerr_coeff: f64,
    pub cavity_length_m: f64,
    pub pump_mode_index: i32,
    pub mode_count: usize,
}

impl PhysicalParams {
    /// Parameters of the reference 1-THz silicon-nitride ring used throughout
    /// the test suite: finesse 3000, D2/2π = 0.5 GHz, D4/2π = −1.645 MHz,
    /// pumps at μ = ±63 on a 200-mode grid.
    pub fn reference_ring() -> Self {
        PhysicalParams {
            fsr_hz: 1.0e12,
            finesse: 3000.0,
            d2_hz: 0.5e9,
            d4_hz: -1.645e6,
            kerr_coeff: 1.0,
            cavity_length_m: 2.0 * PI * 23.0e-6,
            pump_mode_index: 63,
            mode_count: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64); 4] = [
            ("fsr_hz", self.fsr_hz),
            ("finesse", self.finesse),
            ("kerr_coeff", self.kerr_coeff),
            ("cavity_length_m", self.cavity_length_m),
        ];
        for (name, v) in checks {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::bad_param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !self.d2_hz.is_finite() || !self.d4_hz.is_finite() {
            return Err(Error::bad_param("d2_hz/d4_hz", "dispersion coefficients must be finite"));
        }
        let grid = ModeGrid::new(self.mode_count)?;
        if self.pump_mode_index <= grid.mu_min() || self.pump_mode_index >= grid.mu_max() {
            return Err(Error::bad_param(
                "pump_mode_index",
                format!(
                    "must lie strictly inside [{}, {}], got {}",
                    grid.mu_min(),
                    grid.mu_max(),
                    self.pump_mode_index
                ),
            ));
        }
        Ok(())
    }

    /// Round-trip time t_R = 1/FSR in seconds.
    pub fn round_trip_time(&self) -> f64 {
        1.0 / self.fsr_hz
    }

    /// Total amplitude decay per round trip, Γ = π / finesse.
    pub fn total_loss(&self) -> f64 {
        PI / self.finesse
    }

    /// Normalized dispersion coefficient `d_n = t_R (2π D_n_hz) / Γ`.
    pub fn normalized_coefficient(&self, d_n_hz: f64) -> f64 {
        self.round_trip_time() * (2.0 * PI * d_n_hz) / self.total_loss()
    }

    /// Scale factor between physical field amplitude and normalized amplitude,
    /// `√(γ L / Γ)`.
    pub fn field_scale(&self) -> f64 {
        (self.kerr_coeff * self.cavity_length_m / self.total_loss()).sqrt()
    }
}

/// Fully normalized system description: everything the dynamics needs.
#[derive(Debug, Clone)]
pub struct NormalizedParams {
    grid: ModeGrid,
    /// Normalized integrated dispersion on the grid, storage order.
    d_int: Vec<f64>,
    pub delta_eff: f64,
    pub nu: crate::C64,
    pub gamma_total: f64,
    pub gamma_c: f64,
    pub gamma_i: f64,
    pub pump_mode_index: i32,
}

impl NormalizedParams {
    /// Build normalized parameters from physical ones.
    ///
    /// `overcoupling_ratio` is γ_c / γ_total ∈ (0, 1]. All rates are rescaled
    /// so that γ_total = 1; `d̂_int(0) = 0` holds exactly by construction.
    pub fn normalize(
        p: &PhysicalParams,
        delta_eff: f64,
        nu: crate::C64,
        overcoupling_ratio: f64,
    ) -> Result<Self> {
        p.validate()?;
        if !delta_eff.is_finite() {
            return Err(Error::bad_param("delta_eff", "must be finite"));
        }
        if !nu.re.is_finite() || !nu.im.is_finite() {
            return Err(Error::bad_param("nu", "must be finite"));
        }
        if !(overcoupling_ratio > 0.0 && overcoupling_ratio <= 1.0) {
            return Err(Error::bad_param(
                "overcoupling_ratio",
                format!("must lie in (0, 1], got {overcoupling_ratio}"),
            ));
        }
        let grid = ModeGrid::new(p.mode_count)?;
        let d2 = p.normalized_coefficient(p.d2_hz);
        let d4 = p.normalized_coefficient(p.d4_hz);
        let d_int = dispersion_profile(&[(2, d2), (4, d4)], grid)?;
        Ok(NormalizedParams {
            grid,
            d_int,
            delta_eff,
            nu,
            gamma_total: 1.0,
            gamma_c: overcoupling_ratio,
            gamma_i: 1.0 - overcoupling_ratio,
            pump_mode_index: p.pump_mode_index,
        })
    }

    /// Assemble normalized parameters directly from normalized coefficients.
    pub fn from_normalized(
        grid: ModeGrid,
        coeffs: &[(u32, f64)],
        delta_eff: f64,
        nu: crate::C64,
        overcoupling_ratio: f64,
        pump_mode_index: i32,
    ) -> Result<Self> {
        if !(overcoupling_ratio > 0.0 && overcoupling_ratio <= 1.0) {
            return Err(Error::bad_param(
                "overcoupling_ratio",
                format!("must lie in (0, 1], got {overcoupling_ratio}"),
            ));
        }
        let d_int = dispersion_profile(coeffs, grid)?;
        Ok(NormalizedParams {
            grid,
            d_int,
            delta_eff,
            nu,
            gamma_total: 1.0,
            gamma_c: overcoupling_ratio,
            gamma_i: 1.0 - overcoupling_ratio,
            pump_mode_index,
        })
    }

    #[inline]
    pub fn grid(&self) -> ModeGrid {
        self.grid
    }

    /// `d̂_int` in storage order.
    #[inline]
    pub fn d_int(&self) -> &[f64] {
        &self.d_int
    }

    /// `d̂_int(μ)` by mode number; zero off the grid is never requested here.
    #[inline]
    pub fn d_int_at(&self, mu: i32) -> f64 {
        self.d_int[self.grid.index_of(mu).expect("mode off grid")]
    }

    /// γ_c / γ_total: the fraction of loss that reaches the output waveguide.
    #[inline]
    pub fn eta(&self) -> f64 {
        self.gamma_c / self.gamma_total
    }

    /// Copy with a different drive point (Δ_eff, ν); dispersion unchanged.
    pub fn with_drive(&self, delta_eff: f64, nu: crate::C64) -> Self {
        let mut out = self.clone();
        out.delta_eff = delta_eff;
        out.nu = nu;
        out
    }
}

/// Evaluate `d̂_int(μ) = Σ_n d_n μ^n / n!` on the grid (storage order).
///
/// Orders below 2 are rejected: the grid is already defined relative to the
/// central frequency and FSR, so constant and linear terms are gauge.
pub fn dispersion_profile(coeffs: &[(u32, f64)], grid: ModeGrid) -> Result<Vec<f64>> {
    for &(order, c) in coeffs {
        if order < 2 {
            return Err(Error::bad_param("dispersion order", format!("order {order} < 2 rejected")));
        }
        if !c.is_finite() {
            return Err(Error::bad_param("dispersion coefficient", format!("order {order} is not finite")));
        }
    }
    let mut out = vec![0.0; grid.len()];
    for (i, v) in out.iter_mut().enumerate() {
        let mu = grid.mu_at(i) as f64;
        let mut acc = 0.0;
        for &(order, c) in coeffs {
            acc += c * mu.powi(order as i32) / factorial(order);
        }
        *v = acc;
    }
    Ok(out)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Zero crossings of a sampled dispersion profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCrossings {
    /// Interpolated crossing positions in mode units, ascending. Symmetric
    /// profiles produce symmetric ± pairs.
    pub positions: Vec<f64>,
    /// Set when the profile is identically zero (every point degenerate);
    /// `positions` is empty in that case.
    pub degenerate: bool,
}

impl ZeroCrossings {
    /// Crossings away from the carrier, the candidate dispersive-wave loci.
    pub fn away_from_carrier(&self) -> Vec<f64> {
        self.positions.iter().copied().filter(|c| c.abs() >= 1.0).collect()
    }
}

/// Locate sign changes of `d_int` on the grid by linear interpolation.
///
/// Grid points where the profile is exactly zero are reported as crossings
/// themselves (the profile touches zero there, e.g. μ = 0 for even profiles).
pub fn zero_crossings(d_int: &[f64], grid: ModeGrid) -> ZeroCrossings {
    assert_eq!(d_int.len(), grid.len(), "profile/grid length mismatch");
    if d_int.iter().all(|&v| v == 0.0) {
        return ZeroCrossings { positions: Vec::new(), degenerate: true };
    }
    let mut positions = Vec::new();
    for i in 0..grid.len() {
        let mu = grid.mu_at(i) as f64;
        if d_int[i] == 0.0 {
            positions.push(mu);
            continue;
        }
        if i + 1 < grid.len() && d_int[i + 1] != 0.0 && d_int[i].signum() != d_int[i + 1].signum() {
            let frac = d_int[i] / (d_int[i] - d_int[i + 1]);
            positions.push(mu + frac);
        }
    }
    positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ZeroCrossings { positions, degenerate: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_grid() -> ModeGrid {
        ModeGrid::new(200).unwrap()
    }

    #[test]
    fn grid_indexing_round_trips() {
        let g = paper_grid();
        assert_eq!(g.mu_min(), -100);
        assert_eq!(g.mu_max(), 99);
        for i in 0..g.len() {
            assert_eq!(g.index_of(g.mu_at(i)), Some(i));
        }
        assert_eq!(g.index_of(100), None);
        assert_eq!(g.conjugate_index(0), None); // μ = −100 has no partner
        assert_eq!(g.conjugate_index(g.index_of(63).unwrap()), g.index_of(-63));
    }

    #[test]
    fn normalization_matches_reference_arithmetic() {
        // 1 THz FSR, finesse 3000: t_R = 1 ps, Γ = π/3000.
        let p = PhysicalParams::reference_ring();
        let d2 = p.normalized_coefficient(p.d2_hz);
        let d4 = p.normalized_coefficient(p.d4_hz);
        assert_relative_eq!(d2, 3.0, epsilon = 1e-3);
        assert_relative_eq!(d4, -9.87e-3, epsilon = 1e-5);
    }

    #[test]
    fn normalization_rejects_bad_inputs() {
        let p = PhysicalParams::reference_ring();
        assert!(NormalizedParams::normalize(&p, 0.0, C64::new(0.5, 0.0), 0.0).is_err());
        assert!(NormalizedParams::normalize(&p, 0.0, C64::new(0.5, 0.0), 1.5).is_err());
        assert!(NormalizedParams::normalize(&p, f64::NAN, C64::new(0.5, 0.0), 0.9).is_err());
        let mut bad = p.clone();
        bad.finesse = f64::INFINITY;
        assert!(NormalizedParams::normalize(&bad, 0.0, C64::new(0.5, 0.0), 0.9).is_err());
        let mut odd = p;
        odd.mode_count = 33;
        assert!(NormalizedParams::normalize(&odd, 0.0, C64::new(0.5, 0.0), 0.9).is_err());
    }

    #[test]
    fn normalization_round_trip_recovers_physical_coefficients() {
        let p = PhysicalParams::reference_ring();
        let gamma = p.total_loss();
        let t_r = p.round_trip_time();
        for d_hz in [p.d2_hz, p.d4_hz] {
            let d_norm = p.normalized_coefficient(d_hz);
            let recovered = d_norm * gamma / (2.0 * std::f64::consts::PI * t_r);
            assert_relative_eq!(recovered, d_hz, max_relative = 1e-12);
        }
    }

    #[test]
    fn loss_split_defaults() {
        let p = PhysicalParams::reference_ring();
        // γ_i = 0.01 γ_c  ⇔  γ_c/γ_total = 1/1.01
        let np = NormalizedParams::normalize(&p, 0.0, C64::new(0.95, 0.0), 1.0 / 1.01).unwrap();
        assert_relative_eq!(np.gamma_total, 1.0);
        assert_relative_eq!(np.gamma_c + np.gamma_i, 1.0, max_relative = 1e-15);
        assert_relative_eq!(np.gamma_i / np.gamma_total, 0.01 / 1.01, max_relative = 1e-12);
    }

    #[test]
    fn profile_matches_hand_arithmetic() {
        let g = paper_grid();
        let d = dispersion_profile(&[(2, 3.0), (4, -9.87e-3)], g).unwrap();
        let at = |mu: i32| d[g.index_of(mu).unwrap()];
        assert_relative_eq!(at(0), 0.0);
        // 3·3600/2 − 9.87e-3·60⁴/24 = 70.2
        assert_relative_eq!(at(60), 70.2, max_relative = 1e-12);
        // sign change just past the crossing near μ ≈ 60.4
        assert_relative_eq!(at(61), 3.0 * 3721.0 / 2.0 - 9.87e-3 * 61f64.powi(4) / 24.0, max_relative = 1e-12);
        assert!(at(61) < 0.0 && at(60) > 0.0);
        assert_relative_eq!(at(61), -112.6, epsilon = 0.01);
    }

    #[test]
    fn profile_zero_for_zero_coefficients() {
        let g = paper_grid();
        let d = dispersion_profile(&[(2, 0.0), (4, 0.0)], g).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn profile_rejects_low_orders() {
        let g = paper_grid();
        assert!(dispersion_profile(&[(1, 1.0)], g).is_err());
        assert!(dispersion_profile(&[(0, 1.0)], g).is_err());
    }

    #[test]
    fn crossings_on_paper_profile() {
        let g = paper_grid();
        let d = dispersion_profile(&[(2, 3.0), (4, -9.87e-3)], g).unwrap();
        let zc = zero_crossings(&d, g);
        assert!(!zc.degenerate);
        let positive: Vec<f64> = zc.positions.iter().copied().filter(|&c| c > 0.5).collect();
        assert_eq!(positive.len(), 1, "exactly one positive crossing, got {:?}", zc.positions);
        // true root of d2 μ²/2 + d4 μ⁴/24: μ = √(−12 d2/d4) ≈ 60.39
        let exact = (-12.0 * 3.0 / -9.87e-3_f64).sqrt();
        assert!((positive[0] - exact).abs() < 0.05, "crossing {} vs exact {}", positive[0], exact);
        // symmetric partner and the touching zero at the carrier
        assert!(zc.positions.iter().any(|&c| (c + positive[0]).abs() < 1e-9));
        assert!(zc.positions.iter().any(|&c| c == 0.0));
        assert_eq!(zc.away_from_carrier().len(), 2);
    }

    #[test]
    fn crossings_pure_quadratic_only_carrier() {
        let g = paper_grid();
        let d = dispersion_profile(&[(2, 3.0)], g).unwrap();
        let zc = zero_crossings(&d, g);
        assert_eq!(zc.positions, vec![0.0]);
        assert!(zc.away_from_carrier().is_empty());
    }

    #[test]
    fn crossings_degenerate_profile() {
        let g = paper_grid();
        let zc = zero_crossings(&vec![0.0; g.len()], g);
        assert!(zc.degenerate);
        assert!(zc.positions.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Even-order coefficients give an exactly even profile on the grid.
        #[test]
        fn profile_parity(d2 in -5.0f64..5.0, d4 in -0.05f64..0.05, d6 in -1e-4f64..1e-4) {
            let g = ModeGrid::new(64).unwrap();
            let d = dispersion_profile(&[(2, d2), (4, d4), (6, d6)], g).unwrap();
            for mu in 1..=31i32 {
                let a = d[g.index_of(mu).unwrap()];
                let b = d[g.index_of(-mu).unwrap()];
                prop_assert_eq!(a, b);
            }
        }
    }
}
