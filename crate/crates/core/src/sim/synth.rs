//! Frequency-domain synthesis of correlated Gaussian photocurrents.
//!
//! Each positive-frequency bin `k` of an `N`-sample trace with mean flux `N̄`
//! and target PSD `s` (SNU) receives a circular complex Gaussian with
//! `E|X_k|² = N·N̄·s`, so a white target of 1 SNU reproduces a per-sample
//! variance of `N̄`. The probe/conjugate pair is drawn from the Cholesky
//! factor of the 2×2 bin covariance. The DC bin is zero and the Nyquist bin
//! is real.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::targets::SpectralTargets;
use super::trace::Trace;
use crate::error::{ensure, Error, Result};
use crate::{fft, seeds};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn circular(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draw a probe/conjugate trace pair whose cross-spectral matrix matches
/// `targets`. The targets must be specified on the bin grid of
/// `n_samples` at `sample_rate`.
pub fn synth_twin_traces(
    targets: &SpectralTargets,
    n_samples: usize,
    sample_rate: f64,
    mean_p: f64,
    mean_c: f64,
    seed: u64,
) -> Result<(Trace, Trace)> {
    ensure(
        n_samples >= 2 && n_samples.is_power_of_two(),
        "n_samples",
        || format!("must be a power of two >= 2, got {n_samples}"),
    )?;
    ensure(mean_p > 0.0 && mean_c > 0.0, "mean_flux", || {
        format!("means must be > 0, got ({mean_p}, {mean_c})")
    })?;
    if !targets.grid.matches_trace(n_samples, sample_rate) {
        return Err(Error::invalid(
            "targets",
            format!(
                "grid does not match {n_samples} samples at {sample_rate} Hz; build it with FrequencyGrid::for_trace"
            ),
        ));
    }

    let mut rng = seeds::rng(seed);
    let bins = n_samples / 2 + 1;
    let nyquist = n_samples / 2;
    let scale = n_samples as f64;
    let mut xp = vec![Complex64::new(0.0, 0.0); bins];
    let mut xc = vec![Complex64::new(0.0, 0.0); bins];
    for k in 1..bins {
        let s11 = scale * mean_p * targets.s_pp[k];
        let s22 = scale * mean_c * targets.s_cc[k];
        let s12 = scale * (mean_p * mean_c).sqrt() * targets.s_pc[k];
        let a = s11.sqrt();
        let b = if a > 0.0 {
            s12 / a
        } else {
            Complex64::new(0.0, 0.0)
        };
        let d = (s22 - b.norm_sqr()).max(0.0).sqrt();
        let (z1, z2) = if k == nyquist {
            (
                Complex64::new(normal(&mut rng), 0.0),
                Complex64::new(normal(&mut rng), 0.0),
            )
        } else {
            (circular(&mut rng), circular(&mut rng))
        };
        xp[k] = a * z1;
        xc[k] = if k == nyquist {
            Complex64::new(b.re * z1.re + d * z2.re, 0.0)
        } else {
            b * z1 + d * z2
        };
    }

    let probe = Trace::new(fft::inverse(xp, n_samples), sample_rate, mean_p)?
        .with_seed(seed, "synth:probe");
    let conj = Trace::new(fft::inverse(xc, n_samples), sample_rate, mean_c)?
        .with_seed(seed, "synth:conjugate");
    Ok((probe, conj))
}

/// Two independent white traces at exactly one shot-noise unit each, the
/// coherent reference of the same total power as a twin pair.
pub fn shot_reference(
    mean_p: f64,
    mean_c: f64,
    n_samples: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<(Trace, Trace)> {
    ensure(mean_p > 0.0 && mean_c > 0.0, "mean_flux", || {
        format!("means must be > 0, got ({mean_p}, {mean_c})")
    })?;
    ensure(
        n_samples >= 2 && n_samples.is_power_of_two(),
        "n_samples",
        || format!("must be a power of two >= 2, got {n_samples}"),
    )?;
    let mut rng = seeds::rng(seed);
    let mut white = |mean: f64| -> Vec<f64> {
        let sigma = mean.sqrt();
        (0..n_samples).map(|_| sigma * normal(&mut rng)).collect()
    };
    let p = white(mean_p);
    let c = white(mean_c);
    Ok((
        Trace::new(p, sample_rate, mean_p)?.with_seed(seed, "shot:probe"),
        Trace::new(c, sample_rate, mean_c)?.with_seed(seed, "shot:conjugate"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::targets::{build_targets, FrequencyGrid};
    use crate::twin_beam::TwinBeamSource;

    fn pair(g1: f64, n: usize, seed: u64) -> (Trace, Trace) {
        let source = TwinBeamSource::new(g1, 1e4).unwrap();
        let grid = FrequencyGrid::for_trace(n, 2.5e9).unwrap();
        let t = build_targets(&source, &grid).unwrap();
        let (mp, mc) = source.means();
        synth_twin_traces(&t, n, 2.5e9, mp, mc, seed).unwrap()
    }

    #[test]
    fn deterministic_given_seed() {
        let a = pair(1.5, 1 << 10, 3);
        let b = pair(1.5, 1 << 10, 3);
        let c = pair(1.5, 1 << 10, 4);
        assert_eq!(a, b);
        assert_ne!(a.0.samples(), c.0.samples());
    }

    #[test]
    fn white_traces_sit_at_shot_noise() {
        let grid = FrequencyGrid::for_trace(1 << 16, 1e6).unwrap();
        let t = SpectralTargets::coherent(grid);
        let (p, c) = synth_twin_traces(&t, 1 << 16, 1e6, 400.0, 100.0, 1).unwrap();
        // the DC bin is empty, so one bin's worth of variance is missing
        assert!(
            (p.variance_snu() - 1.0).abs() < 0.02,
            "{}",
            p.variance_snu()
        );
        assert!(
            (c.variance_snu() - 1.0).abs() < 0.02,
            "{}",
            c.variance_snu()
        );
        assert!(p.mean().abs() < 1e-9);
    }

    #[test]
    fn rejects_mismatched_grid() {
        let grid = FrequencyGrid::for_trace(64, 1e6).unwrap();
        let t = SpectralTargets::coherent(grid);
        assert!(synth_twin_traces(&t, 128, 1e6, 1.0, 1.0, 0).is_err());
        assert!(synth_twin_traces(&t, 64, 2e6, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn shot_reference_difference_is_one_snu() {
        let (p, c) = shot_reference(3e4, 1e4, 1 << 16, 1e6, 9).unwrap();
        let d = p.difference(&c).unwrap();
        assert_eq!(d.mean_flux(), 4e4);
        assert!((d.variance_snu() - 1.0).abs() < 0.02);
    }
}
