//! Detection-chain arithmetic and Monte-Carlo coincidence simulation.
//!
//! Photon pairs reach two detector arms through lumped transmissions (fiber
//! routing, filters, detector efficiency). Each arm also collects pump-power
//! proportional uncorrelated noise (spontaneous Raman scattering along the
//! fibers) and detector dark counts. The Monte Carlo draws Poisson pair and
//! noise streams, thins them by the arm transmissions, applies Gaussian
//! detector jitter, and histograms signal-idler delays; the analytic
//! counterparts exist for every derived quantity so the simulation is always
//! checked against closed-form rates.

use alloc::vec;
use alloc::vec::Vec;
// Inherent float math comes from libm here; std shadows it in test builds.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{ModelError, Result};

/// Losses, timing response and background of the two detection arms.
///
/// Transmissions are end-to-end (propagation plus detector efficiency) in
/// dB. Noise coefficients are source-referred rates per watt of ring-input
/// power; dark counts fire at the detector and do not see the arm loss.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionChain {
    pub signal_transmission_db: f64,
    pub idler_transmission_db: f64,
    /// Gaussian timing jitter sigma per detector, s.
    pub jitter_sigma_s: f64,
    /// Histogram bin width, s.
    pub bin_width_s: f64,
    /// Total histogram span (both delay signs), s.
    pub histogram_span_s: f64,
    /// Uncorrelated noise photons per second per watt of ring-input power.
    pub noise_per_watt_signal: f64,
    pub noise_per_watt_idler: f64,
    /// Dark counts per second per detector.
    pub dark_rate_hz: f64,
}

impl Default for DetectionChain {
    fn default() -> Self {
        Self {
            signal_transmission_db: -13.1,
            idler_transmission_db: -14.2,
            jitter_sigma_s: 25e-12,
            bin_width_s: 35e-12,
            histogram_span_s: 4.2e-9,
            noise_per_watt_signal: 0.0,
            noise_per_watt_idler: 0.0,
            dark_rate_hz: 0.0,
        }
    }
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        if self.signal_transmission_db > 0.0 || self.idler_transmission_db > 0.0 {
            return Err(ModelError::InvalidChain(
                "arm transmissions are losses and must be <= 0 dB",
            ));
        }
        if !(self.bin_width_s > 0.0) {
            return Err(ModelError::InvalidChain("bin width must be > 0"));
        }
        if !(self.histogram_span_s >= self.bin_width_s) {
            return Err(ModelError::InvalidChain("span must cover at least one bin"));
        }
        if !(self.jitter_sigma_s >= 0.0) {
            return Err(ModelError::InvalidChain("jitter must be >= 0"));
        }
        if !(self.noise_per_watt_signal >= 0.0 && self.noise_per_watt_idler >= 0.0) {
            return Err(ModelError::InvalidChain("noise coefficients must be >= 0"));
        }
        if !(self.dark_rate_hz >= 0.0) {
            return Err(ModelError::InvalidChain("dark rate must be >= 0"));
        }
        Ok(())
    }

    pub fn signal_transmission(&self) -> f64 {
        10f64.powf(self.signal_transmission_db / 10.0)
    }

    pub fn idler_transmission(&self) -> f64 {
        10f64.powf(self.idler_transmission_db / 10.0)
    }

    fn n_bins(&self) -> usize {
        // Odd count keeps zero delay at the center of the middle bin.
        let n = (self.histogram_span_s / self.bin_width_s) as usize;
        (n | 1).max(3)
    }
}

/// Detected singles and coincidence rates, counts/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedRates {
    pub singles_signal_hz: f64,
    pub singles_idler_hz: f64,
    pub true_coincidence_hz: f64,
}

/// Singles and true-coincidence rates for an internal pair rate
/// `r_internal_hz` at ring-input power `p_in_w`.
pub fn detected_rates(r_internal_hz: f64, chain: &DetectionChain, p_in_w: f64) -> DetectedRates {
    let t_s = chain.signal_transmission();
    let t_i = chain.idler_transmission();
    DetectedRates {
        singles_signal_hz: (r_internal_hz + chain.noise_per_watt_signal * p_in_w) * t_s
            + chain.dark_rate_hz,
        singles_idler_hz: (r_internal_hz + chain.noise_per_watt_idler * p_in_w) * t_i
            + chain.dark_rate_hz,
        true_coincidence_hz: r_internal_hz * t_s * t_i,
    }
}

/// Binned signal-idler delay histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub bin_width_s: f64,
    pub counts: Vec<u64>,
    pub acquisition_s: f64,
}

impl CoincidenceHistogram {
    /// Delay at the center of bin `k`, s.
    pub fn bin_center_s(&self, k: usize) -> f64 {
        let half_span = 0.5 * self.bin_width_s * self.counts.len() as f64;
        -half_span + (k as f64 + 0.5) * self.bin_width_s
    }
}

const MAX_EXPECTED_EVENTS: f64 = 1e9;
const TARGET_EVENTS_PER_CHUNK: f64 = 2e6;

/// Monte-Carlo coincidence histogram for an internal pair rate at the given
/// ring-input power.
///
/// Pair emissions are Poisson; each photon independently survives its arm,
/// receives Gaussian detector jitter, and joins the per-arm event stream
/// together with uncorrelated noise and dark counts. The acquisition is
/// split into independently seeded chunks merged deterministically, so the
/// result depends only on (inputs, seed).
pub fn simulate_histogram(
    r_internal_hz: f64,
    chain: &DetectionChain,
    p_in_w: f64,
    duration_s: f64,
    seed: u64,
) -> Result<CoincidenceHistogram> {
    chain.validate()?;
    if !(duration_s > 0.0) {
        return Err(ModelError::NonPositiveDuration(duration_s));
    }
    if !(r_internal_hz >= 0.0) {
        return Err(ModelError::NegativePower(r_internal_hz));
    }
    let t_s = chain.signal_transmission();
    let t_i = chain.idler_transmission();
    let noise_s = chain.noise_per_watt_signal * p_in_w * t_s + chain.dark_rate_hz;
    let noise_i = chain.noise_per_watt_idler * p_in_w * t_i + chain.dark_rate_hz;
    let event_rate = r_internal_hz * (t_s + t_i) + noise_s + noise_i;
    let expected = event_rate * duration_s + 2.0 * r_internal_hz * duration_s * 1e-3;
    if expected > MAX_EXPECTED_EVENTS {
        return Err(ModelError::ResourceGuard { expected });
    }

    let n_bins = chain.n_bins();
    let half_window = 0.5 * n_bins as f64 * chain.bin_width_s;
    let mut counts = vec![0u64; n_bins];

    let n_chunks = ((event_rate * duration_s / TARGET_EVENTS_PER_CHUNK).ceil() as usize).max(1);
    let tau = duration_s / n_chunks as f64;
    let jitter = if chain.jitter_sigma_s > 0.0 {
        Some(Normal::new(0.0, chain.jitter_sigma_s).expect("validated sigma"))
    } else {
        None
    };

    let mut signal_events: Vec<f64> = Vec::new();
    let mut idler_events: Vec<f64> = Vec::new();
    for chunk in 0..n_chunks {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        signal_events.clear();
        idler_events.clear();

        let n_pairs = sample_poisson(&mut rng, r_internal_hz * tau);
        for _ in 0..n_pairs {
            let t0: f64 = rng.gen_range(0.0..tau);
            let keep_s = rng.gen_bool(t_s);
            let keep_i = rng.gen_bool(t_i);
            if keep_s {
                signal_events.push(t0 + draw_jitter(&mut rng, &jitter));
            }
            if keep_i {
                idler_events.push(t0 + draw_jitter(&mut rng, &jitter));
            }
        }
        for _ in 0..sample_poisson(&mut rng, noise_s * tau) {
            signal_events.push(rng.gen_range(0.0..tau));
        }
        for _ in 0..sample_poisson(&mut rng, noise_i * tau) {
            idler_events.push(rng.gen_range(0.0..tau));
        }

        signal_events.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        idler_events.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

        // All signal-idler combinations inside the delay window.
        let mut lo = 0usize;
        for &ts in &signal_events {
            while lo < idler_events.len() && idler_events[lo] < ts - half_window {
                lo += 1;
            }
            for &ti in idler_events[lo..].iter() {
                let delay = ti - ts;
                if delay >= half_window {
                    break;
                }
                let bin = ((delay + half_window) / chain.bin_width_s) as usize;
                if bin < n_bins {
                    counts[bin] += 1;
                }
            }
        }
    }
    Ok(CoincidenceHistogram {
        bin_width_s: chain.bin_width_s,
        counts,
        acquisition_s: duration_s,
    })
}

fn sample_poisson(rng: &mut ChaCha12Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64
}

fn draw_jitter(rng: &mut ChaCha12Rng, jitter: &Option<Normal<f64>>) -> f64 {
    match jitter {
        Some(n) => n.sample(rng),
        None => 0.0,
    }
}

/// Coincidence-to-accidental ratio of a histogram: peak-window counts minus
/// background, divided by the background over the same window. The window is
/// the full width at half maximum of the peak above the median background.
pub fn car(hist: &CoincidenceHistogram) -> Result<f64> {
    car_with_uncertainty(hist).map(|(value, _)| value)
}

/// CAR together with a one-standard-error estimate from counting statistics.
pub fn car_with_uncertainty(hist: &CoincidenceHistogram) -> Result<(f64, f64)> {
    let n = hist.counts.len();
    let (peak_idx, &peak) = hist
        .counts
        .iter()
        .enumerate()
        .max_by_key(|(_, &c)| c)
        .ok_or(ModelError::NoCoincidencePeak)?;
    let med_all = median(&hist.counts);
    if peak == 0 || (peak as f64) <= 5.0 * med_all {
        return Err(ModelError::NoCoincidencePeak);
    }

    // Half-maximum window around the peak, above the median floor.
    let half_level = med_all + 0.5 * (peak as f64 - med_all);
    let mut w_lo = peak_idx;
    while w_lo > 0 && hist.counts[w_lo - 1] as f64 >= half_level {
        w_lo -= 1;
    }
    let mut w_hi = peak_idx;
    while w_hi + 1 < n && hist.counts[w_hi + 1] as f64 >= half_level {
        w_hi += 1;
    }
    let window = w_hi - w_lo + 1;

    let off_peak: Vec<u64> = hist
        .counts
        .iter()
        .enumerate()
        .filter(|(k, _)| *k < w_lo || *k > w_hi)
        .map(|(_, &c)| c)
        .collect();
    if off_peak.is_empty() {
        return Err(ModelError::NoCoincidencePeak);
    }
    let bg_per_bin = median(&off_peak);
    let in_window: f64 = hist.counts[w_lo..=w_hi].iter().map(|&c| c as f64).sum();
    let background = bg_per_bin * window as f64;
    if background <= 0.0 {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let car = (in_window - background) / background;

    // Counting-statistics error: Poisson window counts plus the sampling
    // variance of a median of Poisson bins (pi/2 inflation over the mean).
    let var_bg_bin = core::f64::consts::FRAC_PI_2 * bg_per_bin.max(1.0) / off_peak.len() as f64;
    let var_background = (window as f64 * window as f64) * var_bg_bin;
    let variance = in_window / (background * background)
        + (in_window * in_window) / background.powi(4) * var_background;
    Ok((car, variance.sqrt()))
}

fn median(values: &[u64]) -> f64 {
    let mut sorted: Vec<u64> = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) as f64
    }
}

/// Closed-form CAR, `true_coincidences / (singles_s * singles_i * bin)`,
/// returned twice: with the full noise budget in the singles and with the
/// pair-driven singles alone (multi-pair limit).
pub fn car_analytic(
    r_internal_hz: f64,
    chain: &DetectionChain,
    p_in_w: f64,
) -> (f64, f64) {
    let t_s = chain.signal_transmission();
    let t_i = chain.idler_transmission();
    let rates = detected_rates(r_internal_hz, chain, p_in_w);
    let true_c = rates.true_coincidence_hz;
    let acc_noise = rates.singles_signal_hz * rates.singles_idler_hz * chain.bin_width_s;
    let acc_multi =
        (r_internal_hz * t_s) * (r_internal_hz * t_i) * chain.bin_width_s;
    (true_c / acc_noise, true_c / acc_multi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quiet_chain() -> DetectionChain {
        DetectionChain::default()
    }

    #[test]
    fn rate_arithmetic_matches_measured_losses() {
        let chain = quiet_chain();
        let rates = detected_rates(1e6, &chain, 0.0);
        assert_relative_eq!(rates.true_coincidence_hz, 1862.0, max_relative = 1e-3);
        assert_relative_eq!(rates.singles_signal_hz, 1e6 * 0.04898, max_relative = 1e-3);

        // Lossless identity.
        let lossless = DetectionChain {
            signal_transmission_db: 0.0,
            idler_transmission_db: 0.0,
            ..quiet_chain()
        };
        let r = detected_rates(1e6, &lossless, 0.0);
        assert_eq!(r.singles_signal_hz, 1e6);
        assert_eq!(r.singles_idler_hz, 1e6);
        assert_eq!(r.true_coincidence_hz, 1e6);

        // Inverting measured coincidences recovers the internal rate.
        let inferred =
            rates.true_coincidence_hz / (chain.signal_transmission() * chain.idler_transmission());
        assert_relative_eq!(inferred, 1e6, max_relative = 1e-12);
    }

    #[test]
    fn analytic_car_reference_values() {
        let chain = quiet_chain();
        let (with_noise, multi_only) = car_analytic(1e6, &chain, 0.0);
        // No noise configured: the two coincide.
        assert_relative_eq!(with_noise, multi_only, max_relative = 1e-12);
        assert_relative_eq!(multi_only, 2.86e4, max_relative = 5e-3);
        let acc = 1e6 * 0.048978 * 1e6 * 0.038019 * 35e-12;
        assert_relative_eq!(acc, 0.0652, max_relative = 2e-3);

        // Noise singles at 9x the pair singles on each arm cost two orders
        // of magnitude of CAR.
        let noisy = DetectionChain {
            noise_per_watt_signal: 9e6,
            noise_per_watt_idler: 9e6,
            ..quiet_chain()
        };
        let (with_noise, multi_only) = car_analytic(1e6, &noisy, 1.0);
        assert_relative_eq!(multi_only / with_noise, 100.0, max_relative = 1e-9);
    }

    #[test]
    fn loss_scaling_leaves_multipair_car_invariant() {
        let base = DetectionChain {
            noise_per_watt_signal: 5e6,
            noise_per_watt_idler: 7e6,
            ..quiet_chain()
        };
        let x_db = -3.0;
        let scaled = DetectionChain {
            signal_transmission_db: base.signal_transmission_db + x_db,
            idler_transmission_db: base.idler_transmission_db + x_db,
            ..base.clone()
        };
        let x = 10f64.powf(x_db / 10.0);
        let r0 = detected_rates(1e6, &base, 1e-3);
        let r1 = detected_rates(1e6, &scaled, 1e-3);
        assert_relative_eq!(
            r1.true_coincidence_hz,
            r0.true_coincidence_hz * x * x,
            max_relative = 1e-12
        );
        // Source-referred noise scales with the arm, so accidentals scale
        // like x^2 as well and the multipair-only CAR stays put.
        let acc0 = r0.singles_signal_hz * r0.singles_idler_hz;
        let acc1 = r1.singles_signal_hz * r1.singles_idler_hz;
        assert_relative_eq!(acc1, acc0 * x * x, max_relative = 1e-12);
        let (_, multi0) = car_analytic(1e6, &base, 1e-3);
        let (_, multi1) = car_analytic(1e6, &scaled, 1e-3);
        assert_relative_eq!(multi0, multi1, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_simulation_concentrates_in_center_bin() {
        let chain = DetectionChain {
            jitter_sigma_s: 0.0,
            ..quiet_chain()
        };
        let hist = simulate_histogram(5e5, &chain, 0.0, 0.5, 1).unwrap();
        let n = hist.counts.len();
        let center = n / 2;
        let expected_true = 5e5 * 0.5 * chain.signal_transmission() * chain.idler_transmission();
        let got = hist.counts[center] as f64;
        assert!(
            (got - expected_true).abs() < 5.0 * expected_true.sqrt() + 5.0,
            "center bin {got} vs expectation {expected_true}"
        );
        // Off-center bins carry accidentals only.
        let rates = detected_rates(5e5, &chain, 0.0);
        let acc_per_bin =
            rates.singles_signal_hz * rates.singles_idler_hz * chain.bin_width_s * 0.5;
        let off_total: f64 = hist
            .counts
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != center)
            .map(|(_, &c)| c as f64)
            .sum();
        let off_expect = acc_per_bin * (n as f64 - 1.0);
        assert!(
            (off_total - off_expect).abs() < 6.0 * off_expect.sqrt() + 6.0,
            "off-peak {off_total} vs {off_expect}"
        );
    }

    #[test]
    fn jitter_widens_the_peak_as_a_gaussian_pair() {
        let sigma = 50e-12;
        let chain = DetectionChain {
            signal_transmission_db: -3.0,
            idler_transmission_db: -3.0,
            jitter_sigma_s: sigma,
            ..quiet_chain()
        };
        let hist = simulate_histogram(2e6, &chain, 0.0, 1.0, 2).unwrap();
        // Interpolated FWHM of the peak.
        let peak_idx = hist
            .counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .unwrap()
            .0;
        let peak = hist.counts[peak_idx] as f64;
        let half = 0.5 * peak;
        let mut left = hist.bin_center_s(0);
        for k in (0..peak_idx).rev() {
            if (hist.counts[k] as f64) < half {
                let frac = (half - hist.counts[k] as f64)
                    / (hist.counts[k + 1] as f64 - hist.counts[k] as f64);
                left = hist.bin_center_s(k) + frac * hist.bin_width_s;
                break;
            }
        }
        let mut right = hist.bin_center_s(hist.counts.len() - 1);
        for k in peak_idx + 1..hist.counts.len() {
            if (hist.counts[k] as f64) < half {
                let frac = (half - hist.counts[k] as f64)
                    / (hist.counts[k - 1] as f64 - hist.counts[k] as f64);
                right = hist.bin_center_s(k) - frac * hist.bin_width_s;
                break;
            }
        }
        let fwhm = right - left;
        let expected = 2.355 * core::f64::consts::SQRT_2 * sigma;
        assert!(
            (fwhm - expected).abs() / expected < 0.10,
            "fwhm {fwhm:.3e} vs {expected:.3e}"
        );
    }

    #[test]
    fn simulated_car_tracks_the_analytic_value() {
        // The closed form models a single-bin peak, so compare without
        // jitter; timing spread is exercised separately above.
        let chain = DetectionChain {
            noise_per_watt_signal: 2e9,
            noise_per_watt_idler: 2e9,
            jitter_sigma_s: 0.0,
            ..quiet_chain()
        };
        let r = 2e6;
        let p = 1e-3;
        let hist = simulate_histogram(r, &chain, p, 2.0, 3).unwrap();
        let (sim, sigma) = car_with_uncertainty(&hist).unwrap();
        let (analytic, _) = car_analytic(r, &chain, p);
        assert!(
            (sim - analytic).abs() < 3.0 * sigma,
            "simulated {sim} vs analytic {analytic} (sigma {sigma})"
        );
    }

    #[test]
    fn synthetic_histogram_car_example() {
        // Flat background of 100 per bin plus 900 extra over a 2-bin peak:
        // CAR = 1800/200 = 9.
        let mut counts = vec![100u64; 41];
        counts[20] = 1000;
        counts[21] = 1000;
        let hist = CoincidenceHistogram {
            bin_width_s: 35e-12,
            counts,
            acquisition_s: 1.0,
        };
        let value = car(&hist).unwrap();
        assert_relative_eq!(value, 9.0, max_relative = 1e-12);

        let flat = CoincidenceHistogram {
            bin_width_s: 35e-12,
            counts: vec![100u64; 41],
            acquisition_s: 1.0,
        };
        assert!(matches!(car(&flat), Err(ModelError::NoCoincidencePeak)));
    }

    #[test]
    fn determinism_and_resource_guard() {
        let chain = quiet_chain();
        let a = simulate_histogram(1e6, &chain, 0.0, 0.3, 7).unwrap();
        let b = simulate_histogram(1e6, &chain, 0.0, 0.3, 7).unwrap();
        assert_eq!(a.counts, b.counts);
        let c = simulate_histogram(1e6, &chain, 0.0, 0.3, 8).unwrap();
        assert_ne!(a.counts, c.counts);

        assert!(matches!(
            simulate_histogram(1e9, &chain, 0.0, 1e6, 7),
            Err(ModelError::ResourceGuard { .. })
        ));
        assert!(simulate_histogram(1e6, &chain, 0.0, 0.0, 7).is_err());
    }
}
