//! Ideal phase-insensitive amplifier, beam-splitter loss, and shot-noise-unit
//! (SNU) algebra for the twin-beam difference after one arm is amplified.

use serde::{Deserialize, Serialize};

use crate::dispersion::GainLine;
use crate::error::{ensure, Result};
use crate::twin_beam::TwinBeamSource;

/// Default technical excess noise, dB.
pub const DEFAULT_EXCESS_NOISE_DB: f64 = 0.2;
/// Default detection efficiency.
pub const DEFAULT_ETA: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub gain2: f64,
    pub eta: f64,
    pub excess_noise_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            gain2: 1.0,
            eta: DEFAULT_ETA,
            excess_noise_db: DEFAULT_EXCESS_NOISE_DB,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        check_gain(self.gain2)?;
        check_eta(self.eta)?;
        check_excess(self.excess_noise_db)
    }
}

fn check_gain(g: f64) -> Result<()> {
    ensure(g.is_finite() && g >= 1.0, "gain", || {
        format!("must be >= 1, got {g}")
    })
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    ensure(eta.is_finite() && eta > 0.0 && eta <= 1.0, "eta", || {
        format!("must lie in (0, 1], got {eta}")
    })
}

fn check_excess(db: f64) -> Result<()> {
    ensure(db.is_finite() && db >= 0.0, "excess_noise_db", || {
        format!("must be >= 0, got {db}")
    })
}

/// Linear SNU added by `db` of flat excess noise on top of one shot-noise unit.
pub fn excess_snu(db: f64) -> f64 {
    10f64.powf(db / 10.0) - 1.0
}

pub fn to_db(snu: f64) -> f64 {
    10.0 * snu.log10()
}

/// Mean output photon number `G n + G − 1`.
pub fn amp_mean(gain: f64, n_in: f64) -> Result<f64> {
    check_gain(gain)?;
    ensure(n_in.is_finite() && n_in >= 0.0, "n_in", || {
        format!("must be >= 0, got {n_in}")
    })?;
    Ok(gain * n_in + gain - 1.0)
}

/// Output photon-number variance `G² var + G(G−1)(n + 1)`.
pub fn amp_variance(gain: f64, n_in: f64, var_in: f64) -> Result<f64> {
    check_gain(gain)?;
    ensure(n_in.is_finite() && n_in >= 0.0, "n_in", || {
        format!("must be >= 0, got {n_in}")
    })?;
    ensure(var_in.is_finite() && var_in >= 0.0, "var_in", || {
        format!("must be >= 0, got {var_in}")
    })?;
    Ok(gain * gain * var_in + gain * (gain - 1.0) * (n_in + 1.0))
}

/// Output noise in units of the output beam's own shot noise, bright limit.
pub fn snu_out(gain: f64, s_in: f64) -> f64 {
    gain * s_in + (gain - 1.0)
}

/// Beam-splitter loss: `η s + (1 − η)`.
pub fn loss_channel(eta: f64, s: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta * s + (1.0 - eta))
}

/// Intensity-difference noise (SNU of the total detected power) when the
/// conjugate of a pair with first-stage gain `g1` passes an ideal amplifier of
/// gain `g2`, followed by detection loss and flat excess noise.
pub fn difference_noise_after_channel(g1: f64, g2: f64, eta: f64, excess_db: f64) -> Result<f64> {
    check_gain(g1)?;
    check_gain(g2)?;
    check_excess(excess_db)?;
    let stretch = 2.0 * g1 - 1.0;
    let numerator = g1 * stretch + g2 * g2 * (g1 - 1.0) * stretch + g2 * (g2 - 1.0) * (g1 - 1.0)
        - 4.0 * g2 * g1 * (g1 - 1.0);
    let r = numerator / (g1 + g2 * (g1 - 1.0));
    Ok(loss_channel(eta, r)? + excess_snu(excess_db))
}

/// Frequency-resolved form of [`difference_noise_after_channel`] at sideband
/// frequency `f` when the conjugate passes `line` with carrier at `offset`.
///
/// The transferred conjugate noise is weighted by `|M(f)|²`, the pair
/// correlation by `Re M(f)`, and the added amplifier noise by the sideband
/// mean gain. For a spectrally flat line it equals the flat closed form.
pub fn difference_noise_spectrum(
    source: &TwinBeamSource,
    line: &GainLine,
    offset: f64,
    f: f64,
    eta: f64,
    excess_db: f64,
) -> Result<f64> {
    let g1 = source.gain1;
    let w = source.correlation_weight(f);
    let beams = PairSpectrum {
        mean_p: g1,
        mean_c: g1 - 1.0,
        s_p: 1.0 + 2.0 * (g1 - 1.0) * w,
        s_c: 1.0 + 2.0 * (g1 - 1.0) * w,
        s_pc: 2.0 * (g1 * (g1 - 1.0)).sqrt() * w,
    };
    beams.difference_noise(line, offset, f, eta, excess_db)
}

/// Input noise of a beam pair at one sideband frequency: mean fluxes (any
/// common unit), PSDs in SNU of each beam, and the real cross-PSD
/// normalized by the geometric mean of the shot levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpectrum {
    pub mean_p: f64,
    pub mean_c: f64,
    pub s_p: f64,
    pub s_c: f64,
    pub s_pc: f64,
}

impl PairSpectrum {
    /// Difference noise in SNU of the total detected power after the
    /// conjugate passes `line` at `offset`, then detection and excess noise.
    pub fn difference_noise(
        &self,
        line: &GainLine,
        offset: f64,
        f: f64,
        eta: f64,
        excess_db: f64,
    ) -> Result<f64> {
        check_eta(eta)?;
        check_excess(excess_db)?;
        let (np, nc) = (self.mean_p, self.mean_c);
        let gain = line.intensity_gain(offset);
        let m = line.modulation_transfer_at(offset, f);
        let g_bar = line.sideband_mean_gain(offset, f);

        let probe = np * self.s_p;
        let conj = gain * gain * m.norm_sqr() * nc * self.s_c + nc * (g_bar - 1.0) * g_bar;
        let cross = gain * (np * nc).sqrt() * self.s_pc * m.re;
        let r = (probe + conj - 2.0 * cross) / (np + gain * nc);
        Ok(loss_channel(eta, r)? + excess_snu(excess_db))
    }
}

/// Mean of [`difference_noise_spectrum`] over `freqs` in linear SNU.
pub fn band_difference_noise(
    source: &TwinBeamSource,
    line: &GainLine,
    offset: f64,
    freqs: &[f64],
    eta: f64,
    excess_db: f64,
) -> Result<f64> {
    ensure(!freqs.is_empty(), "freqs", || "empty band".into())?;
    let mut sum = 0.0;
    for &f in freqs {
        sum += difference_noise_spectrum(source, line, offset, f, eta, excess_db)?;
    }
    Ok(sum / freqs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{angular_frequency, calibrate, D1_WAVELENGTH};
    use crate::twin_beam::{gain_for_squeezing, squeezing_db};

    #[test]
    fn amplifier_mean() {
        assert_eq!(amp_mean(1.0, 123.0).unwrap(), 123.0);
        assert_eq!(amp_mean(2.0, 0.0).unwrap(), 1.0);
        assert_eq!(amp_mean(1.25, 1e6).unwrap(), 1.25e6 + 0.25);
        assert!(amp_mean(0.9, 1.0).is_err());
    }

    #[test]
    fn amplifier_variance() {
        assert_eq!(amp_variance(1.0, 10.0, 7.0).unwrap(), 7.0);
        assert_eq!(amp_variance(2.0, 0.0, 0.0).unwrap(), 2.0);
        let v = amp_variance(1.25, 1e6, 1e6).unwrap();
        assert!((v - (1.5625e6 + 0.3125 * (1e6 + 1.0))).abs() < 1e-6);
        assert!(amp_variance(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn snu_corollaries() {
        assert_eq!(snu_out(1.0, 0.7), 0.7);
        assert_eq!(snu_out(1.7, 1.0), 2.0 * 1.7 - 1.0);
        let s = snu_out(1.25, 0.5623);
        assert!((s - 0.953).abs() < 1e-3);
        assert!((to_db(s) + 0.21).abs() < 0.01);
    }

    #[test]
    fn snu_matches_exact_moments_for_bright_beams() {
        for &g in &[1.0, 1.1, 1.25, 2.0, 5.62] {
            for &s_in in &[0.5, 1.0, 3.0] {
                let n = 1e6;
                let m = amp_mean(g, n).unwrap();
                let v = amp_variance(g, n, s_in * n).unwrap();
                let exact = v / m;
                assert!(((snu_out(g, s_in) - exact) / exact).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn loss() {
        assert_eq!(loss_channel(1.0, 0.3).unwrap(), 0.3);
        for eta in [0.1, 0.5, 0.95] {
            assert!((loss_channel(eta, 1.0).unwrap() - 1.0).abs() < 1e-15);
        }
        let s = loss_channel(0.95, 0.5625).unwrap();
        assert!((s - 0.5844).abs() < 1e-4);
        assert!((to_db(s) + 2.33).abs() < 0.01);
        assert!(loss_channel(0.0, 1.0).is_err());
        assert!(loss_channel(1.01, 1.0).is_err());
    }

    #[test]
    fn loss_composes() {
        for &(a, b, s) in &[(0.9, 0.8, 0.3), (0.5, 0.99, 2.0), (1.0, 0.1, 0.0)] {
            let two = loss_channel(a, loss_channel(b, s).unwrap()).unwrap();
            let one = loss_channel(a * b, s).unwrap();
            assert!((two - one).abs() < 1e-15);
        }
    }

    #[test]
    fn difference_noise_anchors() {
        let r = difference_noise_after_channel(1.389, 1.0, 1.0, 0.0).unwrap();
        assert!((r - 0.5625).abs() < 1e-3);
        assert!((to_db(r) + 2.50).abs() < 0.01);
        for g1 in [1.0, 1.2, 1.389, 2.0, 7.0] {
            let r = difference_noise_after_channel(g1, 1.0, 1.0, 0.0).unwrap();
            assert!((r - 1.0 / (2.0 * g1 - 1.0)).abs() < 1e-14);
            assert!((to_db(r) - squeezing_db(g1)).abs() < 1e-12);
        }
        let r = difference_noise_after_channel(1.389, 1.25, 1.0, 0.0).unwrap();
        assert!((r - 0.518).abs() < 1e-3, "{r}");
        assert!((to_db(r) + 2.86).abs() < 0.01);
    }

    #[test]
    fn loss_and_excess_pull_toward_and_above_shot_noise() {
        let g1 = gain_for_squeezing(-2.5).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for e in [0.0, 0.1, 0.2, 0.5, 1.0] {
            let r = difference_noise_after_channel(g1, 1.1, 0.95, e).unwrap();
            assert!(r > prev);
            prev = r;
        }
        let mut prev = 0.0;
        for eta in [1.0, 0.9, 0.7, 0.4, 0.1] {
            let r = difference_noise_after_channel(g1, 1.1, eta, 0.0).unwrap();
            assert!(r > prev && r < 1.0);
            prev = r;
        }
    }

    /// Phase-space Monte Carlo of the twin beams with the conjugate amplified
    /// by an independent ideal amplifier.
    #[test]
    fn monte_carlo_difference_noise() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::{Distribution, StandardNormal};

        let (g1, g2, n0) = (1.389_f64, 1.25_f64, 1e6_f64);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = |rng: &mut ChaCha8Rng| -> f64 {
            let z: f64 = StandardNormal.sample(rng);
            0.5 * z
        };
        let samples = 10_000_000;
        let shift = n0 * (g1 - g2 * (g1 - 1.0));
        let (mut s, mut ss, mut tot) = (0.0, 0.0, 0.0);
        let (u1, v1) = (g1.sqrt(), (g1 - 1.0).sqrt());
        let (u2, v2) = (g2.sqrt(), (g2 - 1.0).sqrt());
        for _ in 0..samples {
            let (ar, ai) = (n0.sqrt() + q(&mut rng), q(&mut rng));
            let (br, bi) = (q(&mut rng), q(&mut rng));
            let (er, ei) = (q(&mut rng), q(&mut rng));
            let (pr, pi) = (u1 * ar + v1 * br, u1 * ai - v1 * bi);
            let (cr, ci) = (v1 * ar + u1 * br, -v1 * ai + u1 * bi);
            let (dr, di) = (u2 * cr + v2 * er, u2 * ci - v2 * ei);
            let np = pr * pr + pi * pi - 0.5;
            let nd = dr * dr + di * di - 0.5;
            let diff = np - nd - shift;
            s += diff;
            ss += diff * diff;
            tot += np + nd;
        }
        let n = samples as f64;
        // difference operator is a two-mode quantity: variance correction is 1/4 per mode
        let var = ss / n - (s / n).powi(2) - 0.5;
        let snu = var / (tot / n);
        let expected = difference_noise_after_channel(g1, g2, 1.0, 0.0).unwrap();
        assert!((snu - expected).abs() < 0.01, "{snu} vs {expected}");
    }

    #[test]
    fn spectrum_reduces_to_flat_form() {
        let w = angular_frequency(D1_WAVELENGTH);
        let source = TwinBeamSource::new(1.389, 1e6).unwrap();
        // very wide line: flat gain over the sidebands
        let line = calibrate(10.0 * 1.25f64.log10(), 1e12, 0.025, w).unwrap();
        for &f in &[1e5, 7.5e5, 3e6] {
            let s = difference_noise_spectrum(&source, &line, 0.0, f, 0.95, 0.2).unwrap();
            let flat = difference_noise_after_channel(1.389, 1.25, 0.95, 0.2).unwrap();
            assert!((s - flat).abs() < 1e-6, "{s} vs {flat}");
        }
        let vacuum = GainLine::vacuum(0.025);
        let s = difference_noise_spectrum(&source, &vacuum, 0.0, 1e6, 1.0, 0.0).unwrap();
        assert!((s - 1.0 / (2.0 * 1.389 - 1.0)).abs() < 1e-12);
    }
}
