//! Mean-field dynamics of the parametrically driven NLSE
//!
//! ```text
//! ∂E/∂t = [−1 + i(|E|² − Δ_eff) − i d̂_int(μ)] E + ν E*
//! ```
//!
//! integrated by Strang-split steps: the linear part (loss, detuning,
//! dispersion and the conjugate drive) is applied exactly in mode space via
//! closed-form 2×2 propagators on each (μ, −μ) pair, the Kerr rotation is
//! applied exactly pointwise in azimuthal space. Steady states found by the
//! splitting are polished with Newton steps built from the same linearization
//! that feeds the quantum analysis, so fixed-point residuals reach solver
//! precision rather than the splitting floor.

use crate::field::{FieldState, Fourier};
use crate::grid::NormalizedParams;
use crate::linearize;
use crate::{C64, Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Dynamical regime of a (Δ_eff, ν) point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    BelowThreshold,
    StableSoliton,
    OscillatorySoliton,
    TuringPattern,
    Unclassified,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::BelowThreshold => "BT",
            RegimeLabel::StableSoliton => "SS",
            RegimeLabel::OscillatorySoliton => "OS",
            RegimeLabel::TuringPattern => "TP",
            RegimeLabel::Unclassified => "UN",
        }
    }
}

/// Quantities backing a regime decision.
#[derive(Debug, Clone)]
pub struct RegimeDiagnostics {
    /// ‖rhs‖/‖E‖ at the final state (or ‖E‖ itself below threshold).
    pub residual: f64,
    /// Relative peak-intensity oscillation amplitude over the window.
    pub oscillation_amplitude: f64,
    /// Detected oscillation period, when periodic.
    pub period: Option<f64>,
    /// Fraction of non-DC intensity power in the dominant spatial harmonic.
    pub dominant_harmonic_share: f64,
    /// min/max intensity contrast of the azimuthal profile.
    pub intensity_floor_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub label: RegimeLabel,
    pub diagnostics: RegimeDiagnostics,
}

/// Peak-intensity trace recorded while evolving, for regime analysis.
#[derive(Debug, Clone)]
pub struct TrajectoryWindow {
    pub sample_dt: f64,
    pub peak_intensity: Vec<f64>,
    pub norm: Vec<f64>,
}

/// Tunables for steady-state search and classification.
#[derive(Debug, Clone)]
pub struct SteadyOptions {
    pub dt: f64,
    /// Relative fixed-point residual ‖rhs‖/‖E‖ required for a stationary label.
    pub tol: f64,
    pub max_time: f64,
    /// Norm below which the field counts as extinguished (below threshold).
    pub amplitude_floor: f64,
    /// Relative peak-intensity amplitude above which a state oscillates.
    pub oscillation_threshold: f64,
    /// Classification window length in normalized time units.
    pub window: f64,
    pub blowup_norm: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            dt: 1e-3,
            tol: 1e-10,
            max_time: 200.0,
            amplitude_floor: 1e-4,
            oscillation_threshold: 0.01,
            window: 20.0,
            blowup_norm: 1e6,
        }
    }
}

/// Time derivative of the field from the PDNLSE right-hand side.
///
/// The Kerr term is evaluated in azimuthal space, dispersion in mode space;
/// the conjugate drive maps mode μ to −μ (the unpaired Nyquist mode gets no
/// drive).
pub fn pdnlse_rhs(state: &FieldState, p: &NormalizedParams, fourier: &Fourier) -> Result<Vec<C64>> {
    let grid = p.grid();
    if state.grid() != grid || fourier.grid() != grid {
        return Err(Error::GridMismatch { expected: grid.len(), got: state.grid().len() });
    }
    let field = state.to_field(fourier);
    let kerr: Vec<C64> = field.iter().map(|e| C64::new(0.0, e.norm_sqr()) * e).collect();
    let mut rhs = fourier.field_to_spectrum(&kerr);
    let a = state.spectrum();
    for i in 0..grid.len() {
        let lin = C64::new(-p.gamma_total, -(p.delta_eff + p.d_int()[i]));
        rhs[i] += lin * a[i];
        if let Some(j) = grid.conjugate_index(i) {
            rhs[i] += p.nu * a[j].conj();
        }
    }
    Ok(rhs)
}

/// Antisymmetric two-pulse seed: sech pulses of width `√(d2_eff/(2Δ))` at
/// θ = 0 and θ = π with opposite signs and peak amplitude `√(2Δ_eff)`.
///
/// For ν ≥ 1 the overall phase is set to the drive-locked value
/// `φ = ½·arccos(1/|ν|)`; the exact steady profile is then found by evolution.
pub fn init_antisymmetric_soliton_pair(p: &NormalizedParams, fourier: &Fourier) -> Result<FieldState> {
    let grid = p.grid();
    let delta = p.delta_eff.max(1e-3);
    // curvature of d̂_int at the carrier sets the pulse width scale
    let d2_eff = if grid.index_of(1).is_some() && grid.index_of(-1).is_some() {
        (p.d_int_at(1) + p.d_int_at(-1)).max(1e-6)
    } else {
        1.0
    };
    let width_inv = (2.0 * delta / d2_eff).sqrt();
    let peak = (2.0 * delta).sqrt();
    let nu_mag = p.nu.norm();
    let phase = if nu_mag >= 1.0 { 0.5 * (1.0 / nu_mag).acos() } else { 0.0 } + 0.5 * p.nu.arg();
    let gauge = C64::from_polar(1.0, phase);
    let n = grid.len();
    let field: Vec<C64> = (0..n)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let pulse = |center: f64| {
                let mut d = (theta - center).rem_euclid(2.0 * std::f64::consts::PI);
                if d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                }
                1.0 / (width_inv * d).cosh()
            };
            gauge * peak * (pulse(0.0) - pulse(std::f64::consts::PI))
        })
        .collect();
    FieldState::from_field(&field, 0.0, fourier)
}

/// Random complex spectrum with total norm ≈ `amplitude`.
pub fn noise_seed(p: &NormalizedParams, amplitude: f64, rng_seed: u64) -> FieldState {
    let grid = p.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let per_mode = amplitude / (grid.len() as f64).sqrt();
    let spectrum: Vec<C64> = (0..grid.len())
        .map(|_| {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            C64::new(re, im) * per_mode
        })
        .collect();
    FieldState::new(spectrum, 0.0, grid).expect("finite by construction")
}

/// Cached closed-form propagator for one (μ, −μ) pair over half a step.
#[derive(Debug, Clone, Copy)]
struct PairProp {
    i: usize,
    j: usize,
    e: [C64; 4],
}

/// Strang-split spectral integrator for the PDNLSE.
pub struct Integrator {
    params: NormalizedParams,
    fourier: Fourier,
    dt: f64,
    pairs: Vec<PairProp>,
    /// Scalar decay factors for modes without a conjugate partner.
    singles: Vec<(usize, C64)>,
    pub blowup_norm: f64,
}

/// exp(t·[[a, b], [c, d]]) in closed form.
fn exp2(t: f64, a: C64, b: C64, c: C64, d: C64) -> [C64; 4] {
    let s = (a + d) * 0.5;
    let delta = (a - d) * 0.5;
    let q = (delta * delta + b * c).sqrt();
    let z = q * t;
    let (cosh_z, sinch_z) = if z.norm() < 1e-6 {
        let z2 = z * z;
        (1.0 + z2 * 0.5 + z2 * z2 / 24.0, 1.0 + z2 / 6.0 + z2 * z2 / 120.0)
    } else {
        (z.cosh(), z.sinh() / z)
    };
    let pre = (s * t).exp();
    let st = sinch_z * t;
    [
        pre * (cosh_z + st * delta),
        pre * st * b,
        pre * st * c,
        pre * (cosh_z - st * delta),
    ]
}

impl Integrator {
    pub fn new(params: NormalizedParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::bad_param("dt", format!("must be positive, got {dt}")));
        }
        let fourier = Fourier::new(params.grid());
        let mut integ = Integrator {
            params,
            fourier,
            dt,
            pairs: Vec::new(),
            singles: Vec::new(),
            blowup_norm: 1e6,
        };
        integ.rebuild_propagators();
        Ok(integ)
    }

    pub fn params(&self) -> &NormalizedParams {
        &self.params
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn set_dt(&mut self, dt: f64) {
        self.dt = dt;
        self.rebuild_propagators();
    }

    fn rebuild_propagators(&mut self) {
        let p = &self.params;
        let grid = p.grid();
        let half_dt = 0.5 * self.dt;
        let lambda = |i: usize| C64::new(-p.gamma_total, -(p.delta_eff + p.d_int()[i]));
        self.pairs.clear();
        self.singles.clear();
        for i in 0..grid.len() {
            let mu = grid.mu_at(i);
            match grid.conjugate_index(i) {
                None => self.singles.push((i, (lambda(i) * half_dt).exp())),
                Some(j) if mu > 0 => {
                    // state vector (A_μ, conj A_{−μ})
                    let a = lambda(i);
                    let d = lambda(j).conj();
                    self.pairs.push(PairProp { i, j, e: exp2(half_dt, a, p.nu, p.nu.conj(), d) });
                }
                Some(j) if mu == 0 => {
                    let a = lambda(i);
                    self.pairs.push(PairProp { i, j, e: exp2(half_dt, a, p.nu, p.nu.conj(), a.conj()) });
                }
                Some(_) => {}
            }
        }
    }

    fn linear_half_step(&self, spectrum: &mut [C64]) {
        for &(i, e) in &self.singles {
            spectrum[i] *= e;
        }
        for pp in &self.pairs {
            let v0 = spectrum[pp.i];
            let v1 = spectrum[pp.j].conj();
            let w0 = pp.e[0] * v0 + pp.e[1] * v1;
            if pp.i == pp.j {
                spectrum[pp.i] = w0;
            } else {
                let w1 = pp.e[2] * v0 + pp.e[3] * v1;
                spectrum[pp.i] = w0;
                spectrum[pp.j] = w1.conj();
            }
        }
    }

    /// Advance `steps` split steps. Errors out on norm blow-up.
    pub fn evolve(&self, state: &mut FieldState, steps: usize) -> Result<()> {
        self.evolve_recording(state, steps, usize::MAX).map(|_| ())
    }

    /// Advance while sampling the peak azimuthal intensity every
    /// `sample_stride` steps (`usize::MAX` disables sampling).
    pub fn evolve_recording(
        &self,
        state: &mut FieldState,
        steps: usize,
        sample_stride: usize,
    ) -> Result<TrajectoryWindow> {
        if state.grid() != self.params.grid() {
            return Err(Error::GridMismatch {
                expected: self.params.grid().len(),
                got: state.grid().len(),
            });
        }
        let dt = self.dt;
        let mut window = TrajectoryWindow {
            sample_dt: dt * sample_stride.min(steps.max(1)) as f64,
            peak_intensity: Vec::new(),
            norm: Vec::new(),
        };
        for step in 0..steps {
            let spectrum = state.spectrum_mut();
            self.linear_half_step(spectrum);
            let mut field = self.fourier.spectrum_to_field(spectrum);
            let mut peak = 0.0f64;
            for e in field.iter_mut() {
                let intensity = e.norm_sqr();
                peak = peak.max(intensity);
                *e *= C64::from_polar(1.0, intensity * dt);
            }
            let new_spec = self.fourier.field_to_spectrum(&field);
            state.spectrum_mut().copy_from_slice(&new_spec);
            self.linear_half_step(state.spectrum_mut());
            state.time += dt;

            if sample_stride != usize::MAX && step % sample_stride == 0 {
                window.peak_intensity.push(peak);
                window.norm.push(state.norm());
            }
            if step % 64 == 0 || step + 1 == steps {
                let norm = state.norm();
                if !norm.is_finite() || norm > self.blowup_norm {
                    return Err(Error::BlowUp { time: state.time, norm, bound: self.blowup_norm });
                }
            }
        }
        Ok(window)
    }

    /// PDNLSE right-hand side for the integrator's parameters.
    pub fn rhs(&self, state: &FieldState) -> Result<Vec<C64>> {
        pdnlse_rhs(state, &self.params, &self.fourier)
    }

    /// ‖rhs‖ / ‖E‖ (or ‖rhs‖ itself when the field is tiny).
    pub fn relative_residual(&self, state: &FieldState) -> Result<f64> {
        let rhs = self.rhs(state)?;
        let rhs_norm = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let norm = state.norm();
        Ok(if norm > 1e-12 { rhs_norm / norm } else { rhs_norm })
    }

    /// Newton refinement of an almost-stationary state using the exact
    /// linearization `M − Γ` in quadrature coordinates.
    pub fn newton_polish(&self, state: &FieldState, max_iter: usize) -> Result<FieldState> {
        let grid = self.params.grid();
        let n = grid.len();
        let mut current = state.clone();
        let mut best = current.clone();
        let mut best_res = self.relative_residual(&current)?;
        for _ in 0..max_iter {
            let rhs = self.rhs(&current)?;
            let rhs_norm = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if rhs_norm < 1e-14 * current.norm().max(1.0) {
                break;
            }
            let gf = linearize::interaction_matrices(&current, &self.params)?;
            let m = linearize::assemble_m(&gf)?;
            // J = M − γ_total in the (x|p) ordering used throughout
            let mut jac = m.into_matrix();
            for k in 0..2 * n {
                jac[(k, k)] -= self.params.gamma_total;
            }
            let mut f = faer::Mat::<f64>::zeros(2 * n, 1);
            for i in 0..n {
                f[(i, 0)] = -rhs[i].re;
                f[(n + i, 0)] = -rhs[i].im;
            }
            let lu = jac.partial_piv_lu();
            use faer::linalg::solvers::Solve;
            let delta = lu.solve(&f);
            let mut spec = current.spectrum().to_vec();
            for i in 0..n {
                spec[i] += C64::new(delta[(i, 0)], delta[(n + i, 0)]);
            }
            current = FieldState::new(spec, current.time, grid)?;
            let res = self.relative_residual(&current)?;
            if res < best_res {
                best_res = res;
                best = current.clone();
            } else {
                break;
            }
        }
        Ok(best)
    }
}

/// Oscillation analysis of a peak-intensity trace.
///
/// Returns `(relative_amplitude, period)` when the trace shows a sustained
/// periodic oscillation; the period comes from the first autocorrelation
/// maximum above 0.5.
fn detect_oscillation(trace: &[f64], sample_dt: f64, threshold: f64) -> (f64, Option<f64>) {
    if trace.len() < 16 {
        return (0.0, None);
    }
    let mean = trace.iter().sum::<f64>() / trace.len() as f64;
    if mean <= 0.0 {
        return (0.0, None);
    }
    let max = trace.iter().cloned().fold(f64::MIN, f64::max);
    let min = trace.iter().cloned().fold(f64::MAX, f64::min);
    let rel_amp = (max - min) / mean;
    if rel_amp < threshold {
        return (rel_amp, None);
    }
    // sustained, not a decaying ringdown: compare half-window amplitudes
    let half = trace.len() / 2;
    let amp = |s: &[f64]| {
        let hi = s.iter().cloned().fold(f64::MIN, f64::max);
        let lo = s.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    };
    let first = amp(&trace[..half]);
    let second = amp(&trace[half..]);
    if second < 0.6 * first {
        return (rel_amp, None);
    }
    let x: Vec<f64> = trace.iter().map(|v| v - mean).collect();
    let denom: f64 = x.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return (rel_amp, None);
    }
    let max_lag = trace.len() / 2;
    let mut prev = f64::MAX;
    let mut rising = false;
    for lag in 1..max_lag {
        let mut acc = 0.0;
        for t in 0..trace.len() - lag {
            acc += x[t] * x[t + lag];
        }
        let rho = acc / denom;
        if rising && rho < prev && prev > 0.5 {
            return (rel_amp, Some((lag - 1) as f64 * sample_dt));
        }
        rising = rho > prev;
        prev = rho;
    }
    (rel_amp, None)
}

/// Spatial-structure diagnostics of a stationary profile.
fn spatial_diagnostics(state: &FieldState, fourier: &Fourier) -> (f64, f64) {
    let field = state.to_field(fourier);
    let intensity: Vec<C64> = field.iter().map(|e| C64::new(e.norm_sqr(), 0.0)).collect();
    let spec = fourier.field_to_spectrum(&intensity);
    let grid = fourier.grid();
    // combine ±k harmonics of the real intensity profile
    let mut non_dc = 0.0f64;
    let mut dominant = 0.0f64;
    for k in 1..=grid.len() / 2 {
        let mut p = 0.0;
        if let Some(i) = grid.index_of(k as i32) {
            p += spec[i].norm_sqr();
        }
        if let Some(i) = grid.index_of(-(k as i32)) {
            p += spec[i].norm_sqr();
        }
        non_dc += p;
        dominant = dominant.max(p);
    }
    let share = if non_dc > 0.0 { dominant / non_dc } else { 0.0 };
    let max_i = intensity.iter().map(|v| v.re).fold(f64::MIN, f64::max);
    let min_i = intensity.iter().map(|v| v.re).fold(f64::MAX, f64::min);
    let floor_ratio = if max_i > 0.0 { (min_i / max_i).max(0.0) } else { 0.0 };
    (share, floor_ratio)
}

/// Label a recorded trajectory window ending in `state`.
///
/// Below-threshold, stationary (soliton vs extended pattern) and oscillatory
/// outcomes are distinguished; anything ambiguous stays `Unclassified`.
pub fn classify_regime(
    window: &TrajectoryWindow,
    state: &FieldState,
    residual: f64,
    fourier: &Fourier,
    opts: &SteadyOptions,
) -> Classification {
    let (rel_amp, period) = detect_oscillation(&window.peak_intensity, window.sample_dt, opts.oscillation_threshold);
    let (share, floor_ratio) = spatial_diagnostics(state, fourier);
    let diagnostics = RegimeDiagnostics {
        residual,
        oscillation_amplitude: rel_amp,
        period,
        dominant_harmonic_share: share,
        intensity_floor_ratio: floor_ratio,
    };
    let label = if state.norm() < opts.amplitude_floor {
        RegimeLabel::BelowThreshold
    } else if residual < opts.tol {
        // stationary: extended periodic pattern (no deep nulls) vs localized pulses
        if share > 0.5 && floor_ratio > 0.05 {
            RegimeLabel::TuringPattern
        } else {
            RegimeLabel::StableSoliton
        }
    } else if rel_amp > opts.oscillation_threshold && period.is_some() {
        RegimeLabel::OscillatorySoliton
    } else {
        RegimeLabel::Unclassified
    };
    Classification { label, diagnostics }
}

/// Integrate from `seed` until the state is stationary within `opts.tol`,
/// a sustained periodic oscillation is detected, or `opts.max_time` elapses.
///
/// Never fabricates a steady state: timeouts return `Unclassified` with the
/// last residual in the diagnostics.
pub fn find_steady_state(
    seed: FieldState,
    p: &NormalizedParams,
    opts: &SteadyOptions,
) -> Result<(FieldState, Classification)> {
    if opts.tol <= 0.0 {
        return Err(Error::bad_param("tol", "must be positive"));
    }
    let mut integ = Integrator::new(p.clone(), opts.dt)?;
    integ.blowup_norm = opts.blowup_norm;
    let mut state = seed;
    let steps_per_window = (opts.window / opts.dt).ceil() as usize;
    let sample_stride = (steps_per_window / 512).max(1);
    let mut elapsed = 0.0;
    let mut windows_done = 0usize;
    loop {
        let window = integ.evolve_recording(&mut state, steps_per_window, sample_stride)?;
        elapsed += opts.window;
        windows_done += 1;
        let norm = state.norm();
        if norm < opts.amplitude_floor {
            let mut class = classify_regime(&window, &state, norm, integ.fourier(), opts);
            class.label = RegimeLabel::BelowThreshold;
            class.diagnostics.residual = norm;
            return Ok((state, class));
        }
        let residual = integ.relative_residual(&state)?;
        if residual < 1e-5 {
            let polished = integ.newton_polish(&state, 10)?;
            let polished_res = integ.relative_residual(&polished)?;
            if polished_res < opts.tol {
                let class = classify_regime(&window, &polished, polished_res, integ.fourier(), opts);
                return Ok((polished, class));
            }
        }
        // skip the first window as transient before declaring oscillation
        if windows_done >= 2 {
            let class = classify_regime(&window, &state, residual, integ.fourier(), opts);
            if class.label == RegimeLabel::OscillatorySoliton {
                return Ok((state, class));
            }
        }
        if elapsed >= opts.max_time {
            let mut class = classify_regime(&window, &state, residual, integ.fourier(), opts);
            if class.label != RegimeLabel::BelowThreshold && residual >= opts.tol && class.label != RegimeLabel::OscillatorySoliton {
                class.label = RegimeLabel::Unclassified;
            }
            return Ok((state, class));
        }
    }
}

/// One solved point of the phase diagram.
#[derive(Debug)]
pub struct SweepPoint {
    pub delta_eff: f64,
    pub nu: f64,
    pub outcome: Result<(FieldState, Classification)>,
}

/// Solve every (Δ_eff, ν) grid point with both a noise seed and a soliton-pair
/// seed; the soliton seed takes precedence when it sustains a soliton.
/// Individual failures are recorded and the sweep continues.
pub fn phase_diagram_sweep(
    base: &NormalizedParams,
    deltas: &[f64],
    nus: &[f64],
    opts: &SteadyOptions,
    noise_amplitude: f64,
    rng_seed: u64,
) -> Vec<SweepPoint> {
    let points: Vec<(usize, f64, f64)> = deltas
        .iter()
        .enumerate()
        .flat_map(|(i, &d)| nus.iter().enumerate().map(move |(j, &v)| (i * nus.len() + j, d, v)))
        .collect();
    points
        .into_par_iter()
        .map(|(idx, delta, nu)| {
            let p = base.with_drive(delta, C64::new(nu, 0.0));
            let outcome = solve_point(&p, opts, noise_amplitude, rng_seed.wrapping_add(idx as u64));
            SweepPoint { delta_eff: delta, nu, outcome }
        })
        .collect()
}

fn solve_point(
    p: &NormalizedParams,
    opts: &SteadyOptions,
    noise_amplitude: f64,
    rng_seed: u64,
) -> Result<(FieldState, Classification)> {
    let fourier = Fourier::new(p.grid());
    let soliton = init_antisymmetric_soliton_pair(p, &fourier)?;
    let from_soliton = find_steady_state(soliton, p, opts)?;
    match from_soliton.1.label {
        RegimeLabel::StableSoliton | RegimeLabel::OscillatorySoliton => Ok(from_soliton),
        _ => {
            let noise = noise_seed(p, noise_amplitude, rng_seed);
            let from_noise = find_steady_state(noise, p, opts)?;
            match from_noise.1.label {
                RegimeLabel::Unclassified => Ok(from_soliton),
                _ => Ok(from_noise),
            }
        }
    }
}
