//! Simulation of bright twin beams, one of which is advanced by a nearby
//! Lorentzian gain line, and of the spectral and correlation measurements
//! used to observe the advance and the noise it adds.
//!
//! The crate is organized bottom-up:
//!
//! * [`dispersion`] models the gain line: refractive index, gain, group
//!   index, and the transfer of intensity sidebands.
//! * [`twin_beam`] and [`channel`] give closed-form photon statistics of the
//!   seeded pair and of amplification, loss, and excess noise.
//! * [`sim`] synthesizes seeded photocurrent traces and propagates them.
//! * [`analysis`] estimates spectra and cross-correlations and extracts
//!   squeezing and delays.
//! * [`scenario`] runs whole scans from a JSON config or a built-in preset.

pub mod analysis;
pub mod channel;
pub mod dispersion;
pub mod error;
pub mod fft;
pub mod scenario;
pub mod seeds;
pub mod sim;
pub mod twin_beam;

pub use error::{Error, Result};
