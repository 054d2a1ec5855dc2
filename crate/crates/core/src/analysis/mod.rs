//! Measurement pipeline: Welch spectra, shot-noise normalization, band
//! filtering, and cross-correlation delay estimation.

mod filter;
mod spectrum;
mod xcorr;

pub use filter::{band_filter, BandFilter, EDGE_OCTAVES};
pub use spectrum::{
    average, band_squeezing_db, psd, snu_normalize, EstimatorMeta, Normalization, PsdAccumulator,
    Spectrum, WelchConfig, Window, DEFAULT_SEGMENT_LEN,
};
pub use xcorr::{cross_correlation, peak_delay, XcorrAccumulator, XcorrResult, PEAK_TIE_TOLERANCE};
