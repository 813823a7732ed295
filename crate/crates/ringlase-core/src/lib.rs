//! Physics core for a self-pumped microring photon-pair source simulator.
//!
//! A silicon add-drop microring sits inside a fiber-loop laser cavity and acts
//! as its spectral filter, so the lasing line automatically tracks the ring
//! resonance as it redshifts under thermo-optic load. The modules below model
//! that system end to end:
//!
//! - [`spectral`]: units, wavelength/frequency conversion, grids, Lorentzian
//!   line amplitudes.
//! - [`ring`]: cold and power-dependent ("hot") resonator model, port
//!   transmissions.
//! - [`laser`]: saturated-gain steady state of the loop, self-consistent
//!   power/shift fixed point, multimode pump spectrum synthesis.
//! - [`biphoton`]: joint spectral amplitude of the photon pairs generated by
//!   spontaneous four-wave mixing, stimulated-FWM reconstruction, pair rate.
//! - [`schmidt`]: Schmidt decomposition of the biphoton wavefunction.
//! - [`counting`]: detection-chain arithmetic and Monte-Carlo coincidence
//!   histograms.
//!
//! The crate is `no_std` (with `alloc`); all file formats, configuration and
//! the command-line runner live in the companion `ringlase` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod biphoton;
pub mod counting;
pub mod error;
pub mod laser;
pub mod ring;
pub mod schmidt;
pub mod spectral;

pub use error::{ModelError, Result};
