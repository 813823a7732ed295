//! Error type shared by all model layers.

use thiserror::Error;

/// Errors produced by the physics core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("wavelength must be strictly positive, got {0} m")]
    NonPositiveWavelength(f64),

    #[error("angular frequency must be strictly positive, got {0} rad/s")]
    NonPositiveFrequency(f64),

    #[error("spectral grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),

    #[error("spectral grid span must be strictly positive, got {0} rad/s")]
    NonPositiveSpan(f64),

    #[error("linewidth must be strictly positive, got {0} rad/s")]
    NonPositiveLinewidth(f64),

    #[error("quality factor must be strictly positive, got {0}")]
    NonPositiveQ(f64),

    #[error("invalid ring parameters: {0}")]
    InvalidRing(&'static str),

    #[error("invalid thermal parameters: {0}")]
    InvalidThermal(&'static str),

    #[error("invalid loop parameters: {0}")]
    InvalidLoop(&'static str),

    #[error("invalid detection chain: {0}")]
    InvalidChain(&'static str),

    #[error("optical power must be non-negative, got {0} W")]
    NegativePower(f64),

    #[error("steady-state solve did not converge after {iterations} iterations (last ring-input power {last_power_w} W)")]
    SolverDiverged { iterations: usize, last_power_w: f64 },

    #[error("no lasing at {current_ma} mA: below threshold, the pump spectrum is empty")]
    BelowThreshold { current_ma: f64 },

    #[error("pump spectrum needs at least 2 modes, got {0}")]
    TooFewModes(usize),

    #[error("seed frequency {0} rad/s lies outside the signal grid")]
    SeedOutsideGrid(f64),

    #[error("spectral grid does not overlap its resonance (peak field enhancement below 1e-3)")]
    GridOffResonance,

    #[error("joint amplitude matrix is identically zero")]
    EmptyMatrix,

    #[error("matrix dimensions {rows}x{cols} do not match {len} amplitudes")]
    DimensionMismatch { rows: usize, cols: usize, len: usize },

    #[error("expected event count {expected:.3e} exceeds 1e9; split the acquisition into shorter runs")]
    ResourceGuard { expected: f64 },

    #[error("histogram has no detectable coincidence peak")]
    NoCoincidencePeak,

    #[error("duration must be strictly positive, got {0} s")]
    NonPositiveDuration(f64),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, ModelError>;
