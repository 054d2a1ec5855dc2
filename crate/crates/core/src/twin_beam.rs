//! Second-order photon statistics of seeded four-wave-mixing twin beams.
//!
//! All forms are the bright-beam limit: terms of order one photon are dropped
//! next to the seed photon number.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Default spectral width of the pair correlations, Hz.
pub const DEFAULT_PAIR_BANDWIDTH: f64 = 20e6;
/// Default Lorentzian corner of the correlation-band tail, Hz.
pub const DEFAULT_ROLLOFF: f64 = 5e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwinBeamSource {
    /// Linear gain of the first four-wave-mixing process.
    pub gain1: f64,
    /// Mean seed photon number per sample.
    pub seed_flux: f64,
    /// Full width of the correlated band, Hz.
    #[serde(default = "default_pair_bandwidth")]
    pub pair_bandwidth: f64,
    /// Corner of the Lorentzian tail outside the flat band, Hz.
    #[serde(default = "default_rolloff")]
    pub rolloff: f64,
}

fn default_pair_bandwidth() -> f64 {
    DEFAULT_PAIR_BANDWIDTH
}

fn default_rolloff() -> f64 {
    DEFAULT_ROLLOFF
}

impl TwinBeamSource {
    pub fn new(gain1: f64, seed_flux: f64) -> Result<Self> {
        let source = TwinBeamSource {
            gain1,
            seed_flux,
            pair_bandwidth: DEFAULT_PAIR_BANDWIDTH,
            rolloff: DEFAULT_ROLLOFF,
        };
        source.validate()?;
        Ok(source)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.gain1.is_finite() && self.gain1 >= 1.0, "gain1", || {
            format!("must be >= 1, got {}", self.gain1)
        })?;
        ensure(
            self.seed_flux.is_finite() && self.seed_flux > 0.0,
            "seed_flux",
            || format!("must be > 0, got {}", self.seed_flux),
        )?;
        ensure(
            self.pair_bandwidth.is_finite() && self.pair_bandwidth > 0.0,
            "pair_bandwidth",
            || format!("must be > 0, got {}", self.pair_bandwidth),
        )?;
        ensure(
            self.rolloff.is_finite() && self.rolloff > 0.0,
            "rolloff",
            || format!("must be > 0, got {}", self.rolloff),
        )
    }

    pub fn stats(&self) -> BeamStats {
        BeamStats::seeded(self.gain1, self.seed_flux)
    }

    /// Mean photon numbers per sample of (probe, conjugate).
    pub fn means(&self) -> (f64, f64) {
        (
            self.gain1 * self.seed_flux,
            (self.gain1 - 1.0) * self.seed_flux,
        )
    }

    /// Relative strength of the pair correlations at frequency `f`: one inside
    /// `|f| ≤ pair_bandwidth/2`, Lorentzian tail beyond.
    pub fn correlation_weight(&self, f: f64) -> f64 {
        let edge = self.pair_bandwidth / 2.0;
        let f = f.abs();
        if f <= edge {
            1.0
        } else {
            let u = (f - edge) / self.rolloff;
            1.0 / (1.0 + u * u)
        }
    }
}

/// Photon-number moments of the probe/conjugate pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BeamStats {
    pub mean_p: f64,
    pub mean_c: f64,
    pub var_p: f64,
    pub var_c: f64,
    /// `⟨n_p n_c⟩ − ⟨n_p⟩⟨n_c⟩`
    pub cov_pc: f64,
}

impl BeamStats {
    fn seeded(g1: f64, n0: f64) -> Self {
        let stretch = 2.0 * g1 - 1.0;
        BeamStats {
            mean_p: g1 * n0,
            mean_c: (g1 - 1.0) * n0,
            var_p: g1 * stretch * n0,
            var_c: (g1 - 1.0) * stretch * n0,
            cov_pc: 2.0 * g1 * (g1 - 1.0) * n0,
        }
    }

    /// Two independent coherent beams.
    pub fn coherent(mean_p: f64, mean_c: f64) -> Self {
        BeamStats {
            mean_p,
            mean_c,
            var_p: mean_p,
            var_c: mean_c,
            cov_pc: 0.0,
        }
    }

    /// Variance of the photon-number difference.
    pub fn difference_variance(&self) -> f64 {
        self.var_p + self.var_c - 2.0 * self.cov_pc
    }

    /// Difference variance of coherent beams of the same total power.
    pub fn shot_noise_reference(&self) -> f64 {
        self.mean_p + self.mean_c
    }
}

/// Moments of a seeded two-mode amplifier with gain `gain1` and `seed_flux`
/// input photons.
pub fn seeded_stats(gain1: f64, seed_flux: f64) -> Result<BeamStats> {
    ensure(gain1.is_finite() && gain1 >= 1.0, "gain1", || {
        format!("must be >= 1, got {gain1}")
    })?;
    ensure(
        seed_flux.is_finite() && seed_flux >= 0.0,
        "seed_flux",
        || format!("must be >= 0, got {seed_flux}"),
    )?;
    Ok(BeamStats::seeded(gain1, seed_flux))
}

pub fn intensity_difference_variance(stats: &BeamStats) -> f64 {
    stats.difference_variance()
}

/// Intensity-difference noise of the seeded pair relative to the standard
/// quantum limit, dB (negative is squeezed).
pub fn squeezing_db(gain1: f64) -> f64 {
    -10.0 * (2.0 * gain1 - 1.0).log10()
}

/// Inverse of [`squeezing_db`].
pub fn gain_for_squeezing(squeezing_db: f64) -> Result<f64> {
    ensure(
        squeezing_db.is_finite() && squeezing_db <= 0.0,
        "squeezing_db",
        || format!("must be <= 0 dB, got {squeezing_db}"),
    )?;
    Ok((10f64.powf(-squeezing_db / 10.0) + 1.0) / 2.0)
}
