//! Steady state of the fiber-loop laser built around the ring filter.
//!
//! The loop is a saturated-gain oscillator: a booster amplifier with linear
//! (in dB) small-signal gain versus supply current, closed through the ring's
//! drop port. The clamped steady state follows the Rigrod balance
//! `G0/(1 + P/P_sat) * T = 1`, where the round-trip transmission `T` is the
//! measured cold value multiplied by the hot drop response at the lasing
//! wavelength. Because the lasing line tracks the hot resonance peak, the
//! only power dependence left in `T` is the nonlinear absorption penalty,
//! which is what bends the lasing curve below its linear fit at high current.
//!
//! The intracavity field is a comb of loop longitudinal modes. Modes keep a
//! nonzero weight while their unsaturated round-trip gain stays above one;
//! inside that band the weights follow the hot ring lineshape raised to a
//! flattening exponent that mimics gain competition under saturation.

use alloc::vec::Vec;
// Inherent float math comes from libm here; std shadows it in test builds.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{ModelError, Result};
use crate::ring::{field_enhancement, hot_state, HotRingState, Resonance, RingParams, ThermalNonlinearParams};
use crate::spectral::{make_grid, SpectralGrid, Wavelength, TWO_PI_C};

/// Loop cavity parameters.
///
/// Power bookkeeping: the Rigrod balance runs on the loop power at the gain
/// medium, `P_loop`; the ring sees `P_in = ring_input_factor * P_loop`. All
/// public powers are ring-input referred, and the monitor photodiode reading
/// is `P_pm = P_in / monitor_factor`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopParams {
    /// Measured cold round-trip transmission (linear fraction).
    pub round_trip_transmission: f64,
    /// Gain-medium saturation power, W.
    pub saturation_power_w: f64,
    /// Threshold current of the calibrated gain map, mA.
    pub threshold_current_ma: f64,
    /// Small-signal gain slope, dB per mA of supply current.
    pub gain_slope_db_per_ma: f64,
    /// Ring-input power as a fraction of the loop power at the gain medium.
    pub ring_input_factor: f64,
    /// Ring-input power per watt read on the monitor photodiode.
    pub monitor_factor: f64,
    /// Loop longitudinal mode spacing, meters of wavelength.
    pub mode_spacing_m: f64,
    /// Saturation-flattening exponent applied to the mode weights.
    pub flattening_exponent: f64,
}

impl Default for LoopParams {
    fn default() -> Self {
        Self {
            round_trip_transmission: 0.0895,
            saturation_power_w: 0.031_622_776_601_683_795,
            threshold_current_ma: 70.4,
            // Calibrated so a linear fit of the full model over 72-95 mA
            // returns the measured 100.1 nW/mA monitor slope.
            gain_slope_db_per_ma: GAIN_SLOPE_DEFAULT_DB_PER_MA,
            ring_input_factor: 0.25,
            monitor_factor: 565.0,
            mode_spacing_m: 5e-14,
            flattening_exponent: 0.5,
        }
    }
}

/// Default gain slope; see `LoopParams::default`.
pub const GAIN_SLOPE_DEFAULT_DB_PER_MA: f64 = 0.031_122_305_832;

impl LoopParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.round_trip_transmission > 0.0 && self.round_trip_transmission < 1.0) {
            return Err(ModelError::InvalidLoop(
                "round-trip transmission must lie in (0, 1)",
            ));
        }
        if !(self.saturation_power_w > 0.0) {
            return Err(ModelError::InvalidLoop("saturation power must be > 0"));
        }
        if !(self.threshold_current_ma >= 0.0) {
            return Err(ModelError::InvalidLoop("threshold current must be >= 0"));
        }
        if !(self.gain_slope_db_per_ma > 0.0) {
            return Err(ModelError::InvalidLoop("gain slope must be > 0"));
        }
        if !(self.ring_input_factor > 0.0) {
            return Err(ModelError::InvalidLoop("ring input factor must be > 0"));
        }
        if !(self.monitor_factor > 0.0) {
            return Err(ModelError::InvalidLoop("monitor factor must be > 0"));
        }
        if !(self.mode_spacing_m > 0.0) {
            return Err(ModelError::InvalidLoop("mode spacing must be > 0"));
        }
        if !(self.flattening_exponent > 0.0) {
            return Err(ModelError::InvalidLoop("flattening exponent must be > 0"));
        }
        Ok(())
    }

    /// Round-trip small-signal gain-transmission product,
    /// `G0(I) * T_tot = 10^(g1 (I - I_th) / 10)`; exactly 1 at threshold.
    fn round_trip_gain(&self, current_ma: f64) -> f64 {
        10f64.powf(self.gain_slope_db_per_ma * (current_ma - self.threshold_current_ma) / 10.0)
    }
}

/// Small-signal gain of the amplifier at the given supply current (linear).
pub fn small_signal_gain(current_ma: f64, loop_params: &LoopParams) -> f64 {
    loop_params.round_trip_gain(current_ma) / loop_params.round_trip_transmission
}

/// Saturated steady-state power with the cold ring, referred to the ring
/// input. Zero at and below threshold.
pub fn rigrod_power(current_ma: f64, loop_params: &LoopParams) -> f64 {
    let excess = loop_params.round_trip_gain(current_ma) - 1.0;
    if excess <= 0.0 {
        0.0
    } else {
        loop_params.ring_input_factor * loop_params.saturation_power_w * excess
    }
}

/// Converged operating point of the loop at one supply current.
#[derive(Debug, Clone, PartialEq)]
pub struct LasingState {
    pub current_ma: f64,
    /// Converged ring-input power, W; zero below threshold.
    pub p_in_w: f64,
    /// Lasing center wavelength; tracks the hot pump resonance.
    pub lasing_wavelength: Wavelength,
    pub hot: HotRingState,
    pub above_threshold: bool,
}

impl LasingState {
    /// Monitor photodiode reading corresponding to the converged power.
    pub fn monitor_power_w(&self, loop_params: &LoopParams) -> f64 {
        self.p_in_w / loop_params.monitor_factor
    }
}

const MAX_FIXED_POINT_ITERATIONS: usize = 10_000;
const FIXED_POINT_RELATIVE_TOLERANCE: f64 = 1e-6;

/// Solves the coupled power/shift fixed point at one supply current.
///
/// Each iteration evaluates the hot ring at the current power estimate,
/// multiplies the cold round-trip transmission by the hot drop response at
/// the lasing wavelength (the hot resonance peak), and re-solves the Rigrod
/// balance. Updates are damped by 1/2; convergence is declared when
/// successive ring-input powers differ by less than 1e-6 relative.
pub fn solve_steady_state(
    current_ma: f64,
    loop_params: &LoopParams,
    ring: &RingParams,
    tn: &ThermalNonlinearParams,
) -> Result<LasingState> {
    let gamma = loop_params.round_trip_gain(current_ma);
    if gamma <= 1.0 {
        let hot = hot_state(ring, tn, 0.0)?;
        let lasing_wavelength = hot.center_wavelength(Resonance::Pump);
        return Ok(LasingState {
            current_ma,
            p_in_w: 0.0,
            lasing_wavelength,
            hot,
            above_threshold: false,
        });
    }

    let p_sat_in = loop_params.ring_input_factor * loop_params.saturation_power_w;
    let mut p = rigrod_power(current_ma, loop_params);
    for _ in 0..MAX_FIXED_POINT_ITERATIONS {
        let hot = hot_state(ring, tn, p)?;
        let omega_lase = hot.line(Resonance::Pump).center();
        let response = hot.drop_peak_scale()
            * field_enhancement(omega_lase, Resonance::Pump, &hot).norm_sqr();
        let target = p_sat_in * (gamma * response - 1.0).max(0.0);
        let next = 0.5 * p + 0.5 * target;
        let converged = (next - p).abs() <= FIXED_POINT_RELATIVE_TOLERANCE * next.max(f64::MIN_POSITIVE);
        p = next;
        if converged {
            let hot = hot_state(ring, tn, p)?;
            let lasing_wavelength = hot.center_wavelength(Resonance::Pump);
            return Ok(LasingState {
                current_ma,
                p_in_w: p,
                lasing_wavelength,
                hot,
                above_threshold: p > 0.0,
            });
        }
    }
    Err(ModelError::SolverDiverged {
        iterations: MAX_FIXED_POINT_ITERATIONS,
        last_power_w: p,
    })
}

/// Solves the steady state for every current in `currents_ma`, propagating
/// solver failures per point.
pub fn lasing_curve(
    currents_ma: &[f64],
    loop_params: &LoopParams,
    ring: &RingParams,
    tn: &ThermalNonlinearParams,
) -> Vec<(f64, Result<LasingState>)> {
    currents_ma
        .iter()
        .map(|&i| (i, solve_steady_state(i, loop_params, ring, tn)))
        .collect()
}

/// Finds the supply current that produces the requested ring-input power, by
/// bisection on the monotone power-current characteristic.
pub fn current_for_power(
    target_p_in_w: f64,
    loop_params: &LoopParams,
    ring: &RingParams,
    tn: &ThermalNonlinearParams,
) -> Result<f64> {
    if !(target_p_in_w > 0.0) {
        return Err(ModelError::NegativePower(target_p_in_w));
    }
    // Walk upward in current until the target power is bracketed; back off if
    // a probe lands outside the solver's convergent envelope.
    let mut lo = loop_params.threshold_current_ma;
    let mut hi = lo;
    let mut p_hi = 0.0;
    let mut step = 10.0;
    while p_hi < target_p_in_w {
        let trial = hi + step;
        match solve_steady_state(trial, loop_params, ring, tn) {
            Ok(state) => {
                hi = trial;
                p_hi = state.p_in_w;
            }
            Err(_) => {
                step *= 0.5;
                if step < 1e-3 {
                    return Err(ModelError::SolverDiverged {
                        iterations: 0,
                        last_power_w: p_hi,
                    });
                }
            }
        }
        if hi > lo + 1000.0 {
            return Err(ModelError::SolverDiverged {
                iterations: 0,
                last_power_w: p_hi,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = solve_steady_state(mid, loop_params, ring, tn)?.p_in_w;
        if p < target_p_in_w {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Discrete multimode spectrum of the intracavity pump.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSpectrum {
    /// Comb of loop longitudinal mode frequencies.
    pub grid: SpectralGrid,
    /// Complex spectral amplitude per mode; `|a|^2 * mode spacing` is power.
    pub amplitudes: Vec<num_complex::Complex64>,
    /// Total carried power, W.
    pub total_power_w: f64,
}

impl PumpSpectrum {
    /// A single oscillating mode at `omega` carrying `power_w`; the comb
    /// keeps the given spacing with a dark second mode so the grid stays
    /// well formed.
    pub fn single_mode(omega: f64, power_w: f64, spacing: f64) -> Result<Self> {
        let grid = make_grid(omega + 0.5 * spacing, spacing, 2)?;
        let a0 = (power_w / spacing).sqrt();
        Ok(Self {
            grid,
            amplitudes: alloc::vec![num_complex::Complex64::new(a0, 0.0), num_complex::Complex64::new(0.0, 0.0)],
            total_power_w: power_w,
        })
    }

    /// Builds a spectrum from an explicit comb and amplitudes.
    pub fn from_modes(grid: SpectralGrid, amplitudes: Vec<num_complex::Complex64>) -> Result<Self> {
        if grid.n_points() != amplitudes.len() {
            return Err(ModelError::DimensionMismatch {
                rows: grid.n_points(),
                cols: 1,
                len: amplitudes.len(),
            });
        }
        let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.step();
        Ok(Self {
            grid,
            amplitudes,
            total_power_w: total,
        })
    }

    /// Discrete integral of the spectral power, `sum |a|^2 * spacing`.
    pub fn integrated_power_w(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.step()
    }

    /// Power carried by mode `k`.
    pub fn mode_power_w(&self, k: usize) -> f64 {
        self.amplitudes[k].norm_sqr() * self.grid.step()
    }

    /// Interpolated full width at half maximum of the mode-power envelope,
    /// rad/s; `None` if the spectrum has no clear peak.
    pub fn emission_fwhm(&self) -> Option<f64> {
        let powers: Vec<f64> = (0..self.amplitudes.len())
            .map(|k| self.amplitudes[k].norm_sqr())
            .collect();
        let (peak_idx, &peak) = powers
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
        if peak <= 0.0 {
            return None;
        }
        let half = 0.5 * peak;
        let step = self.grid.step();
        let mut left = self.grid.point(0);
        for k in (0..peak_idx).rev() {
            if powers[k] < half {
                let frac = (half - powers[k]) / (powers[k + 1] - powers[k]);
                left = self.grid.point(k) + frac * step;
                break;
            }
        }
        let mut right = self.grid.point(self.grid.n_points() - 1);
        for k in peak_idx + 1..powers.len() {
            if powers[k] < half {
                let frac = (half - powers[k]) / (powers[k - 1] - powers[k]);
                right = self.grid.point(k) - frac * step;
                break;
            }
        }
        Some(right - left)
    }
}

/// Normalized mode weights of the lasing comb, together with their grid.
///
/// A mode keeps a weight while its unsaturated round-trip gain
/// `G0 T S |F|^2` is at least one; inside the band the weight is the hot
/// pump lineshape raised to the flattening exponent.
pub fn mode_weights(
    state: &LasingState,
    loop_params: &LoopParams,
    n_modes: usize,
) -> Result<(SpectralGrid, Vec<f64>)> {
    if !state.above_threshold {
        return Err(ModelError::BelowThreshold {
            current_ma: state.current_ma,
        });
    }
    if n_modes < 2 {
        return Err(ModelError::TooFewModes(n_modes));
    }
    let lambda = state.lasing_wavelength.meters();
    let spacing = TWO_PI_C * loop_params.mode_spacing_m / (lambda * lambda);
    let grid = make_grid(
        state.lasing_wavelength.to_angular_frequency().rad_per_s(),
        (n_modes as f64 - 1.0) * spacing,
        n_modes,
    )?;
    let gamma = loop_params.round_trip_gain(state.current_ma);
    let unsaturated = gamma * state.hot.drop_peak_scale();
    let line = state.hot.line(Resonance::Pump);
    let beta = loop_params.flattening_exponent;
    let weights: Vec<f64> = grid
        .iter()
        .map(|w| {
            let shape = line.power_response(w);
            if unsaturated * shape >= 1.0 {
                shape.powf(beta)
            } else {
                0.0
            }
        })
        .collect();
    Ok((grid, weights))
}

/// Synthesizes the multimode pump spectrum of a lasing state.
///
/// Mode powers follow [`mode_weights`], normalized so the comb integrates to
/// the converged ring-input power; per-mode phases are drawn independently
/// and uniformly from a ChaCha stream seeded by `seed`.
pub fn pump_spectrum(
    state: &LasingState,
    loop_params: &LoopParams,
    n_modes: usize,
    seed: u64,
) -> Result<PumpSpectrum> {
    let (grid, weights) = mode_weights(state, loop_params, n_modes)?;
    let weight_sum: f64 = weights.iter().sum();
    debug_assert!(weight_sum > 0.0, "an above-threshold comb has a live center mode");
    let spacing = grid.step();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let amplitudes: Vec<num_complex::Complex64> = weights
        .iter()
        .map(|&w| {
            let phase: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
            let magnitude = (state.p_in_w * w / (weight_sum * spacing)).sqrt();
            num_complex::Complex64::from_polar(magnitude, phase)
        })
        .collect();
    Ok(PumpSpectrum {
        grid,
        amplitudes,
        total_power_w: state.p_in_w,
    })
}
