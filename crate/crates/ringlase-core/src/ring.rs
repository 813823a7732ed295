//! Cold and power-dependent model of the add-drop racetrack resonator.
//!
//! Each resonance is a single Lorentzian pole characterized by its measured
//! center wavelength and quality factor. Under optical load the whole comb
//! redshifts linearly with the ring-input power (thermo-optic effect) and the
//! linewidths broaden linearly with power (two-photon absorption). The excess
//! intracavity loss behind that broadening also eats into the on-resonance
//! drop-port transmission; that reduction grows quadratically with power, in
//! line with free-carrier absorption driven by two-photon-generated carriers.

use num_complex::Complex64;
// Inherent float math comes from libm here; std shadows it in test builds.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ModelError, Result};
use crate::spectral::{AngularFrequency, LorentzianLine, Wavelength, TWO_PI_C};

/// Which of the three working resonances is addressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resonance {
    Pump,
    Signal,
    Idler,
}

/// Ring port selector for transmission queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    Through,
    Drop,
}

/// Cold geometry and resonance data of the racetrack resonator.
#[derive(Debug, Clone, PartialEq)]
pub struct RingParams {
    /// Physical round-trip length, m.
    pub length_m: f64,
    /// Group index, shared by all three resonances.
    pub group_index: f64,
    pub pump_wavelength: Wavelength,
    pub signal_wavelength: Wavelength,
    pub idler_wavelength: Wavelength,
    pub pump_q: f64,
    pub signal_q: f64,
    pub idler_q: f64,
    /// On-resonance through-port extinction, dB (negative; critical coupling).
    pub through_extinction_db: f64,
    /// On-resonance input-to-drop transmission budget, dB (negative).
    pub drop_budget_db: f64,
}

impl RingParams {
    /// Checks the structural invariants: positive geometry and Q factors,
    /// ordered resonances, and signal/idler sitting two free spectral ranges
    /// from the pump to within 5%.
    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0) {
            return Err(ModelError::InvalidRing("length must be positive"));
        }
        if !(self.group_index > 0.0) {
            return Err(ModelError::InvalidRing("group index must be positive"));
        }
        for q in [self.pump_q, self.signal_q, self.idler_q] {
            if !(q > 0.0) {
                return Err(ModelError::NonPositiveQ(q));
            }
        }
        let (ls, lp, li) = (
            self.signal_wavelength.meters(),
            self.pump_wavelength.meters(),
            self.idler_wavelength.meters(),
        );
        if !(ls < lp && lp < li) {
            return Err(ModelError::InvalidRing(
                "resonances must be ordered signal < pump < idler",
            ));
        }
        let two_fsr = 2.0 * fsr(self.pump_wavelength, self.group_index, self.length_m).meters();
        for gap in [li - lp, lp - ls] {
            if (gap - two_fsr).abs() > 0.05 * two_fsr {
                return Err(ModelError::InvalidRing(
                    "signal/idler must sit two free spectral ranges from the pump within 5%",
                ));
            }
        }
        if self.through_extinction_db > 0.0 || self.drop_budget_db > 0.0 {
            return Err(ModelError::InvalidRing(
                "port levels are losses and must be given in non-positive dB",
            ));
        }
        Ok(())
    }

    fn wavelength(&self, which: Resonance) -> Wavelength {
        match which {
            Resonance::Pump => self.pump_wavelength,
            Resonance::Signal => self.signal_wavelength,
            Resonance::Idler => self.idler_wavelength,
        }
    }

    fn q(&self, which: Resonance) -> f64 {
        match which {
            Resonance::Pump => self.pump_q,
            Resonance::Signal => self.signal_q,
            Resonance::Idler => self.idler_q,
        }
    }

    /// Cold FWHM of a resonance in rad/s, `G = w0/Q`.
    pub fn cold_fwhm_rad(&self, which: Resonance) -> f64 {
        self.wavelength(which).to_angular_frequency().rad_per_s() / self.q(which)
    }
}

/// Thermal and nonlinear response coefficients of the loaded ring.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalNonlinearParams {
    /// Thermo-optic redshift per watt of ring-input power, m/W.
    pub shift_m_per_w: f64,
    /// Power scale of the TPA broadening: `G(P) = G0 * (1 + P/P_tpa)`.
    pub tpa_power_w: f64,
    /// Extra on-resonance drop-port loss, in dB, when the broadening reaches
    /// one cold linewidth (P = P_tpa). Scales as `(P/P_tpa)^2`, the signature
    /// of absorption by carriers generated two photons at a time.
    pub drop_excess_db: f64,
}

impl ThermalNonlinearParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.shift_m_per_w >= 0.0) {
            return Err(ModelError::InvalidThermal("shift coefficient must be >= 0"));
        }
        if !(self.tpa_power_w > 0.0) {
            return Err(ModelError::InvalidThermal("TPA power scale must be > 0"));
        }
        if !(self.drop_excess_db >= 0.0) {
            return Err(ModelError::InvalidThermal("drop excess loss must be >= 0"));
        }
        Ok(())
    }

    /// Frozen-out limit: no shift, no broadening, no excess loss.
    pub fn disabled() -> Self {
        Self {
            shift_m_per_w: 0.0,
            tpa_power_w: f64::INFINITY,
            drop_excess_db: 0.0,
        }
    }
}

/// Ring state at a given operating power: shifted centers, broadened widths,
/// and the on-resonance drop-port scale left after nonlinear absorption.
#[derive(Debug, Clone, PartialEq)]
pub struct HotRingState {
    pub p_in_w: f64,
    lines: [LorentzianLine; 3],
    through_extinction_lin: f64,
    drop_budget_lin: f64,
    drop_peak_scale: f64,
}

impl HotRingState {
    /// The hot Lorentzian of the selected resonance.
    pub fn line(&self, which: Resonance) -> &LorentzianLine {
        match which {
            Resonance::Pump => &self.lines[0],
            Resonance::Signal => &self.lines[1],
            Resonance::Idler => &self.lines[2],
        }
    }

    /// Hot resonance center wavelength.
    pub fn center_wavelength(&self, which: Resonance) -> Wavelength {
        AngularFrequency::new(self.line(which).center())
            .expect("hot center is positive")
            .to_wavelength()
    }

    /// Hot FWHM expressed in meters of wavelength.
    pub fn fwhm_wavelength(&self, which: Resonance) -> f64 {
        let line = self.line(which);
        let lambda = TWO_PI_C / line.center();
        line.fwhm() * lambda * lambda / TWO_PI_C
    }

    /// On-resonance drop transmission relative to the cold peak; 1 at zero
    /// power, decreasing as nonlinear absorption builds up.
    pub fn drop_peak_scale(&self) -> f64 {
        self.drop_peak_scale
    }
}

/// Resonance FWHM in wavelength, `dl = l0/Q`.
pub fn resonance_fwhm(lambda0: Wavelength, q: f64) -> Result<Wavelength> {
    if !(q > 0.0) {
        return Err(ModelError::NonPositiveQ(q));
    }
    Wavelength::new(lambda0.meters() / q)
}

/// Free spectral range, `FSR = l0^2 / (n_g * L)`.
pub fn fsr(lambda0: Wavelength, group_index: f64, length_m: f64) -> Wavelength {
    let l = lambda0.meters();
    Wavelength::new(l * l / (group_index * length_m)).expect("positive inputs give a positive FSR")
}

/// Evaluates the ring at ring-input power `p_in_w`: every center redshifted
/// by `k_th * P`, every FWHM scaled by `1 + P/P_tpa`. Zero power returns the
/// cold ring exactly.
pub fn hot_state(
    ring: &RingParams,
    tn: &ThermalNonlinearParams,
    p_in_w: f64,
) -> Result<HotRingState> {
    if !(p_in_w >= 0.0) {
        return Err(ModelError::NegativePower(p_in_w));
    }
    let shift = tn.shift_m_per_w * p_in_w;
    let broaden = 1.0 + p_in_w / tn.tpa_power_w;
    let mut lines = [None, None, None];
    for (slot, which) in [Resonance::Pump, Resonance::Signal, Resonance::Idler]
        .into_iter()
        .enumerate()
    {
        let lambda_hot = Wavelength::new(ring.wavelength(which).meters() + shift)?;
        let fwhm_hot = ring.cold_fwhm_rad(which) * broaden;
        lines[slot] = Some(LorentzianLine::new(
            lambda_hot.to_angular_frequency(),
            fwhm_hot,
        )?);
    }
    let tau = p_in_w / tn.tpa_power_w;
    let excess_db = tn.drop_excess_db * tau * tau;
    Ok(HotRingState {
        p_in_w,
        lines: [lines[0].unwrap(), lines[1].unwrap(), lines[2].unwrap()],
        through_extinction_lin: 10f64.powf(ring.through_extinction_db / 10.0),
        drop_budget_lin: 10f64.powf(ring.drop_budget_db / 10.0),
        drop_peak_scale: 10f64.powf(-excess_db / 10.0),
    })
}

/// Complex field enhancement of the selected hot resonance at `omega`.
pub fn field_enhancement(omega: f64, which: Resonance, hot: &HotRingState) -> Complex64 {
    hot.line(which).amplitude(omega)
}

/// Power transmission of the chosen port at `omega`.
///
/// The through port dips to the configured extinction on resonance and
/// approaches unity far from it; the drop port carries the `|F|^2` lineshape
/// scaled to the configured input-to-drop budget, further reduced at high
/// power by nonlinear absorption. The resonances sit two free spectral
/// ranges apart, so only the nearest one shapes the response.
pub fn port_transmission(omega: f64, port: Port, hot: &HotRingState) -> f64 {
    let shape = [Resonance::Pump, Resonance::Signal, Resonance::Idler]
        .into_iter()
        .map(|r| {
            let line = hot.line(r);
            (line.power_response(omega), (omega - line.center()).abs())
        })
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(shape, _)| shape)
        .unwrap();
    match port {
        Port::Through => (1.0 - (1.0 - hot.through_extinction_lin) * shape).max(0.0),
        Port::Drop => hot.drop_budget_lin * hot.drop_peak_scale * shape,
    }
}
