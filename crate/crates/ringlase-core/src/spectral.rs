//! Units, spectral grids and Lorentzian line amplitudes.
//!
//! All internal spectral math runs in angular frequency (rad/s); wavelengths
//! appear only at the construction and reporting boundaries. Energy
//! conservation for four-wave mixing is linear in angular frequency, not in
//! wavelength, so this keeps the pair-matching arithmetic exact.

use num_complex::Complex64;

use crate::error::{ModelError, Result};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// 2*pi*c, the conversion constant between wavelength and angular frequency.
pub const TWO_PI_C: f64 = 2.0 * core::f64::consts::PI * SPEED_OF_LIGHT;

/// Vacuum wavelength in meters, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn new(meters: f64) -> Result<Self> {
        if meters > 0.0 && meters.is_finite() {
            Ok(Self(meters))
        } else {
            Err(ModelError::NonPositiveWavelength(meters))
        }
    }

    pub fn from_nm(nm: f64) -> Result<Self> {
        Self::new(nm * 1e-9)
    }

    pub fn meters(self) -> f64 {
        self.0
    }

    pub fn nanometers(self) -> f64 {
        self.0 * 1e9
    }

    pub fn to_angular_frequency(self) -> AngularFrequency {
        AngularFrequency(TWO_PI_C / self.0)
    }
}

/// Angular frequency in rad/s, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub fn new(rad_per_s: f64) -> Result<Self> {
        if rad_per_s > 0.0 && rad_per_s.is_finite() {
            Ok(Self(rad_per_s))
        } else {
            Err(ModelError::NonPositiveFrequency(rad_per_s))
        }
    }

    pub fn rad_per_s(self) -> f64 {
        self.0
    }

    pub fn to_wavelength(self) -> Wavelength {
        Wavelength(TWO_PI_C / self.0)
    }
}

/// Converts a vacuum wavelength to angular frequency, `w = 2*pi*c/lambda`.
pub fn wavelength_to_angular_frequency(lambda: Wavelength) -> AngularFrequency {
    lambda.to_angular_frequency()
}

/// Converts an angular frequency back to vacuum wavelength.
pub fn angular_frequency_to_wavelength(omega: AngularFrequency) -> Wavelength {
    omega.to_wavelength()
}

/// Uniform grid of angular frequencies.
///
/// Points run from `center - span/2` to `center + span/2` inclusive, with
/// `step = span/(n_points - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    center: f64,
    span: f64,
    n_points: usize,
}

impl SpectralGrid {
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        self.span / (self.n_points as f64 - 1.0)
    }

    /// The `k`-th grid frequency in rad/s.
    pub fn point(&self, k: usize) -> f64 {
        debug_assert!(k < self.n_points);
        self.center - 0.5 * self.span + k as f64 * self.step()
    }

    pub fn first(&self) -> f64 {
        self.point(0)
    }

    pub fn last(&self) -> f64 {
        self.point(self.n_points - 1)
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.first() && omega <= self.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.point(k))
    }
}

/// Builds a uniform spectral grid centered on `center` with total `span`
/// (rad/s) and `n_points >= 2` samples.
pub fn make_grid(center: f64, span: f64, n_points: usize) -> Result<SpectralGrid> {
    if n_points < 2 {
        return Err(ModelError::GridTooSmall(n_points));
    }
    if !(span > 0.0) || !span.is_finite() {
        return Err(ModelError::NonPositiveSpan(span));
    }
    Ok(SpectralGrid {
        center,
        span,
        n_points,
    })
}

/// Builds a grid from a center wavelength, a span and step given in
/// picometers of wavelength. The pm -> rad/s conversion is taken at the grid
/// center; for sub-nanometer spans the distortion is below 1e-4.
pub fn make_grid_pm(center: AngularFrequency, span_pm: f64, n_points: usize) -> Result<SpectralGrid> {
    let lambda = center.to_wavelength().meters();
    let span = TWO_PI_C * span_pm * 1e-12 / (lambda * lambda);
    make_grid(center.rad_per_s(), span, n_points)
}

/// Single-pole resonance described by its center and full width at half
/// maximum, both in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianLine {
    center: f64,
    fwhm: f64,
}

impl LorentzianLine {
    pub fn new(center: AngularFrequency, fwhm: f64) -> Result<Self> {
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(ModelError::NonPositiveLinewidth(fwhm));
        }
        Ok(Self {
            center: center.rad_per_s(),
            fwhm,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    /// Complex field amplitude `F(w) = (G/2) / (G/2 + i(w - w0))` with
    /// `G` the FWHM. `|F|` is 1 on resonance and `|F|^2` is 1/2 at half a
    /// linewidth of detuning.
    pub fn amplitude(&self, omega: f64) -> Complex64 {
        let half = 0.5 * self.fwhm;
        let denom = Complex64::new(half, omega - self.center);
        Complex64::new(half, 0.0) / denom
    }

    /// Squared magnitude of [`Self::amplitude`].
    pub fn power_response(&self, omega: f64) -> f64 {
        let half = 0.5 * self.fwhm;
        let x = omega - self.center;
        half * half / (half * half + x * x)
    }
}

/// Complex Lorentzian amplitude of `line` evaluated at `omega`.
pub fn lorentzian_amplitude(omega: f64, line: &LorentzianLine) -> Complex64 {
    line.amplitude(omega)
}
