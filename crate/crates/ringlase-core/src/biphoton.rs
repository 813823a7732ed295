//! Joint spectral amplitude of the photon pairs generated by spontaneous
//! four-wave mixing in the hot ring.
//!
//! The pump is a discrete comb of loop modes, so energy conservation is
//! enforced by pair-matching: two pump modes contribute to a signal/idler
//! cell when their frequency sum equals `w_s + w_i` to within half a mode
//! spacing. The ordered pair sum over the comb is a self-convolution of the
//! per-mode effective amplitudes, computed once and shared by the full
//! matrix builder and the stimulated single-row probe, which is what pins
//! the stimulated/spontaneous correspondence to rounding error.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
// Inherent float math comes from libm here; std shadows it in test builds.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ModelError, Result};
use crate::laser::{mode_weights, LasingState, LoopParams, PumpSpectrum};
use crate::ring::{HotRingState, Resonance};
use crate::spectral::SpectralGrid;

/// Biphoton wavefunction sampled on a rectangular signal/idler grid.
///
/// Amplitudes are stored row-major: `amp[i * n_idler + j]` is the value at
/// signal point `i`, idler point `j`. When `normalized` is set the discrete
/// integral `sum |phi|^2 * step_s * step_i` is one.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralAmplitude {
    pub signal_grid: SpectralGrid,
    pub idler_grid: SpectralGrid,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl JointSpectralAmplitude {
    /// Wraps an explicit amplitude matrix; `normalized` declares whether the
    /// caller already scaled it to a unit discrete integral.
    pub fn from_matrix(
        signal_grid: SpectralGrid,
        idler_grid: SpectralGrid,
        amplitudes: Vec<Complex64>,
        normalized: bool,
    ) -> Result<Self> {
        if amplitudes.len() != signal_grid.n_points() * idler_grid.n_points() {
            return Err(ModelError::DimensionMismatch {
                rows: signal_grid.n_points(),
                cols: idler_grid.n_points(),
                len: amplitudes.len(),
            });
        }
        Ok(Self {
            signal_grid,
            idler_grid,
            amplitudes,
            normalized,
        })
    }

    pub fn n_signal(&self) -> usize {
        self.signal_grid.n_points()
    }

    pub fn n_idler(&self) -> usize {
        self.idler_grid.n_points()
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[i * self.n_idler() + j]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Area of one grid cell, (rad/s)^2.
    pub fn cell_area(&self) -> f64 {
        self.signal_grid.step() * self.idler_grid.step()
    }
}

/// Ordered pair sum of the pump comb folded with the hot pump resonance:
/// `K(sigma)` collects `a_m a_m' F(w_m) F(w_m')` over all ordered mode pairs
/// whose frequency sum matches `sigma` on the discrete comb.
struct PairKernel {
    conv: Vec<Complex64>,
    /// Frequency sum corresponding to `conv[0]`.
    origin: f64,
    spacing: f64,
}

impl PairKernel {
    fn build(pump: &PumpSpectrum, hot: &HotRingState) -> Self {
        let spacing = pump.grid.step();
        let line = hot.line(Resonance::Pump);
        let effective: Vec<Complex64> = (0..pump.grid.n_points())
            .map(|m| pump.amplitudes[m] * line.amplitude(pump.grid.point(m)))
            .collect();
        let first = effective.iter().position(|a| a.norm_sqr() > 0.0);
        let last = effective.iter().rposition(|a| a.norm_sqr() > 0.0);
        let (first, last) = match (first, last) {
            (Some(f), Some(l)) => (f, l),
            _ => {
                return Self {
                    conv: Vec::new(),
                    origin: 0.0,
                    spacing,
                }
            }
        };
        let g = &effective[first..=last];
        let m = g.len();
        let mut conv = vec![Complex64::new(0.0, 0.0); 2 * m - 1];
        for (a_idx, a) in g.iter().enumerate() {
            for (b_idx, b) in g.iter().enumerate() {
                conv[a_idx + b_idx] += a * b;
            }
        }
        Self {
            conv,
            origin: 2.0 * pump.grid.point(first),
            spacing,
        }
    }

    /// Kernel value for a frequency sum `sigma`; zero when no pump-mode pair
    /// conserves energy within half a mode spacing.
    fn lookup(&self, sigma: f64) -> Complex64 {
        if self.conv.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let t = (sigma - self.origin) / self.spacing;
        let k = t.round();
        if k < 0.0 || k >= self.conv.len() as f64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.conv[k as usize]
        }
    }
}

fn fill_row(
    omega_s: f64,
    hot: &HotRingState,
    kernel: &PairKernel,
    idler_grid: &SpectralGrid,
    out: &mut [Complex64],
) {
    let f_s = hot.line(Resonance::Signal).amplitude(omega_s);
    let idler_line = hot.line(Resonance::Idler);
    for (j, slot) in out.iter_mut().enumerate() {
        let omega_i = idler_grid.point(j);
        *slot = f_s * idler_line.amplitude(omega_i) * kernel.lookup(omega_s + omega_i);
    }
}

fn check_grid_overlap(grid: &SpectralGrid, hot: &HotRingState, which: Resonance) -> Result<()> {
    let line = hot.line(which);
    let peak = grid
        .iter()
        .map(|w| line.amplitude(w).norm())
        .fold(0.0f64, f64::max);
    if peak < 1e-3 {
        Err(ModelError::GridOffResonance)
    } else {
        Ok(())
    }
}

/// Builds the normalized joint spectral amplitude
/// `phi(w_s, w_i) = F_s(w_s) F_i(w_i) K(w_s + w_i)` for the given pump comb.
pub fn joint_spectral_amplitude(
    pump: &PumpSpectrum,
    hot: &HotRingState,
    signal_grid: &SpectralGrid,
    idler_grid: &SpectralGrid,
) -> Result<JointSpectralAmplitude> {
    check_grid_overlap(signal_grid, hot, Resonance::Signal)?;
    check_grid_overlap(idler_grid, hot, Resonance::Idler)?;
    let kernel = PairKernel::build(pump, hot);
    let (ns, ni) = (signal_grid.n_points(), idler_grid.n_points());
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); ns * ni];
    for i in 0..ns {
        fill_row(
            signal_grid.point(i),
            hot,
            &kernel,
            idler_grid,
            &mut amplitudes[i * ni..(i + 1) * ni],
        );
    }
    let area = signal_grid.step() * idler_grid.step();
    let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * area;
    if total <= 0.0 {
        return Err(ModelError::EmptyMatrix);
    }
    let scale = 1.0 / total.sqrt();
    for a in &mut amplitudes {
        *a *= scale;
    }
    JointSpectralAmplitude::from_matrix(signal_grid.clone(), idler_grid.clone(), amplitudes, true)
}

/// Joint spectral density `|phi|^2`, normalized to a unit discrete integral,
/// row-major like the amplitude matrix.
pub fn jsd(jsa: &JointSpectralAmplitude) -> Vec<f64> {
    let mut density: Vec<f64> = jsa.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = density.iter().sum::<f64>() * jsa.cell_area();
    if total > 0.0 {
        let inv = 1.0 / total;
        for d in &mut density {
            *d *= inv;
        }
    }
    density
}

/// Idler spectrum generated by stimulated four-wave mixing when a seed laser
/// sits at `seed_omega` inside the signal grid. Proportional to the matching
/// joint-density row with a seed-independent constant, because it is built
/// from the same pair kernel.
pub fn stimulated_idler_spectrum(
    seed_omega: f64,
    pump: &PumpSpectrum,
    hot: &HotRingState,
    signal_grid: &SpectralGrid,
    idler_grid: &SpectralGrid,
) -> Result<Vec<f64>> {
    if !signal_grid.contains(seed_omega) {
        return Err(ModelError::SeedOutsideGrid(seed_omega));
    }
    let kernel = PairKernel::build(pump, hot);
    let mut row = vec![Complex64::new(0.0, 0.0); idler_grid.n_points()];
    fill_row(seed_omega, hot, &kernel, idler_grid, &mut row);
    Ok(row.iter().map(|a| a.norm_sqr()).collect())
}

/// Internal pair generation rate, `R = kappa * (P_in * overlap)^2`.
///
/// `overlap` is the weight-averaged hot pump-resonance response of the lasing
/// comb; it tends to one for a narrow low-power line, making the rate exactly
/// quadratic there, and dips below one as the broadened comb spills over the
/// resonance flanks, leaving the rate sub-quadratic but still increasing.
pub fn pair_generation_rate(
    state: &LasingState,
    loop_params: &LoopParams,
    rate_constant: f64,
) -> f64 {
    if !state.above_threshold {
        return 0.0;
    }
    let overlap = pump_resonance_overlap(state, loop_params);
    let driven = state.p_in_w * overlap;
    rate_constant * driven * driven
}

/// Normalized spectral overlap of the lasing comb with the hot pump
/// resonance, in (0, 1].
pub fn pump_resonance_overlap(state: &LasingState, loop_params: &LoopParams) -> f64 {
    // Enough modes to cover the net-gain-1 clip at this operating point.
    let line = state.hot.line(Resonance::Pump);
    let gamma = 10f64.powf(
        loop_params.gain_slope_db_per_ma * (state.current_ma - loop_params.threshold_current_ma)
            / 10.0,
    );
    let unsaturated = gamma * state.hot.drop_peak_scale();
    let half_width = (unsaturated - 1.0).max(0.0).sqrt() * 0.5 * line.fwhm();
    let lambda = state.lasing_wavelength.meters();
    let spacing = crate::spectral::TWO_PI_C * loop_params.mode_spacing_m / (lambda * lambda);
    let n_modes = ((2.0 * half_width / spacing) as usize + 9).max(64);
    let (grid, weights) =
        mode_weights(state, loop_params, n_modes).expect("state checked above threshold");
    let mut weighted = 0.0;
    let mut total = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        weighted += w * line.power_response(grid.point(k));
        total += w;
    }
    weighted / total
}

/// Continuous-pump reference for the joint spectral amplitude.
///
/// Replaces the comb by a smooth spectral envelope `envelope(w)` (power
/// density shape, arbitrary scale) supported on `[support.0, support.1]` and
/// evaluates the energy-conserving pair integral by trapezoidal quadrature
/// with step `quad_step`. This is the independent route used to cross-check
/// the discrete pair-matching kernel; the two agree in the limit of vanishing
/// mode spacing.
pub fn continuous_pump_jsa<F: Fn(f64) -> f64>(
    envelope: F,
    support: (f64, f64),
    hot: &HotRingState,
    signal_grid: &SpectralGrid,
    idler_grid: &SpectralGrid,
    quad_step: f64,
) -> Result<JointSpectralAmplitude> {
    check_grid_overlap(signal_grid, hot, Resonance::Signal)?;
    check_grid_overlap(idler_grid, hot, Resonance::Idler)?;
    let pump_line = hot.line(Resonance::Pump);
    let n_quad = (((support.1 - support.0) / quad_step) as usize).max(2);
    let h = (support.1 - support.0) / n_quad as f64;
    // Pump-side factor tabulated once over the support.
    let factor: Vec<Complex64> = (0..=n_quad)
        .map(|k| {
            let w = support.0 + k as f64 * h;
            envelope(w).max(0.0).sqrt() * pump_line.amplitude(w)
        })
        .collect();
    let (ns, ni) = (signal_grid.n_points(), idler_grid.n_points());
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); ns * ni];
    for i in 0..ns {
        let omega_s = signal_grid.point(i);
        let f_s = hot.line(Resonance::Signal).amplitude(omega_s);
        for j in 0..ni {
            let omega_i = idler_grid.point(j);
            let sigma = omega_s + omega_i;
            let f_i = hot.line(Resonance::Idler).amplitude(omega_i);
            let mut integral = Complex64::new(0.0, 0.0);
            for (k, fk) in factor.iter().enumerate() {
                let w = support.0 + k as f64 * h;
                let partner = sigma - w;
                if partner < support.0 || partner > support.1 {
                    continue;
                }
                let p_idx = (partner - support.0) / h;
                let p0 = p_idx.floor();
                let frac = p_idx - p0;
                let p0 = p0 as usize;
                let partner_val = if p0 + 1 <= n_quad {
                    factor[p0] * (1.0 - frac) + factor[p0 + 1] * frac
                } else {
                    factor[p0]
                };
                let edge = if k == 0 || k == n_quad { 0.5 } else { 1.0 };
                integral += fk * partner_val * edge;
            }
            amplitudes[i * ni + j] = f_s * f_i * integral * h;
        }
    }
    let area = signal_grid.step() * idler_grid.step();
    let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * area;
    if total <= 0.0 {
        return Err(ModelError::EmptyMatrix);
    }
    let scale = 1.0 / total.sqrt();
    for a in &mut amplitudes {
        *a *= scale;
    }
    JointSpectralAmplitude::from_matrix(signal_grid.clone(), idler_grid.clone(), amplitudes, true)
}
