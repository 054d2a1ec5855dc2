use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Result};
use crate::seeds;

/// Sample moments of a photon-number distribution with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMoments {
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
}

/// Photon-number moments at the output of a phase-insensitive amplifier of
/// power gain `gain` driven by a coherent state of `n_in` photons.
///
/// Draws Wigner-function samples of the signal and the idler vacuum,
/// applies `a → √G·a + √(G−1)·b*`, and converts the symmetrically ordered
/// moments to normal order (`n = |α|² − ½`, `Var n = Var|α|² − ¼`).
pub fn sample_amplifier(gain: f64, n_in: f64, samples: usize, seed: u64) -> Result<PhotonMoments> {
    ensure(gain.is_finite() && gain >= 1.0, "gain", || {
        format!("must be >= 1, got {gain}")
    })?;
    ensure(n_in.is_finite() && n_in >= 0.0, "n_in", || {
        format!("must be >= 0, got {n_in}")
    })?;
    ensure(samples >= 2, "samples", || {
        format!("need at least 2, got {samples}")
    })?;
    let mut rng = seeds::rng(seed);
    let mut quadrature = || -> f64 { 0.5 * rng.sample::<f64, _>(StandardNormal) };
    let (u, v) = (gain.sqrt(), (gain - 1.0).sqrt());
    let amplitude = n_in.sqrt();
    // moments of |α|² about a fixed shift, for numerical stability
    let shift = gain * n_in;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let (ar, ai) = (amplitude + quadrature(), quadrature());
        let (br, bi) = (quadrature(), quadrature());
        let (xr, xi) = (u * ar + v * br, u * ai - v * bi);
        let x = xr * xr + xi * xi - shift;
        let x2 = x * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
    }
    let n = samples as f64;
    let m1 = s1 / n;
    let (e2, e3, e4) = (s2 / n, s3 / n, s4 / n);
    let var_w = (e2 - m1 * m1) * n / (n - 1.0);
    let mu4 = e4 - 4.0 * m1 * e3 + 6.0 * m1 * m1 * e2 - 3.0 * m1.powi(4);
    Ok(PhotonMoments {
        samples,
        mean: shift + m1 - 0.5,
        variance: var_w - 0.25,
        se_mean: (var_w / n).sqrt(),
        se_variance: ((mu4 - var_w * var_w).max(0.0) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{amp_mean, amp_variance};

    #[test]
    fn vacuum_input_gives_thermal_statistics() {
        let g = 3.0;
        let m = sample_amplifier(g, 0.0, 400_000, 1).unwrap();
        let mean = amp_mean(g, 0.0).unwrap();
        assert!((m.mean - mean).abs() < 4.0 * m.se_mean, "{m:?}");
        // thermal light: Var n = n̄(n̄ + 1)
        let thermal = mean * (mean + 1.0);
        assert!((m.variance - thermal).abs() < 4.0 * m.se_variance, "{m:?}");
        assert!((amp_variance(g, 0.0, 0.0).unwrap() - thermal).abs() < 1e-12);
    }

    #[test]
    fn unit_gain_keeps_poisson_statistics() {
        let m = sample_amplifier(1.0, 1e4, 200_000, 2).unwrap();
        assert!((m.mean - 1e4).abs() < 4.0 * m.se_mean);
        assert!((m.variance - 1e4).abs() < 4.0 * m.se_variance);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sample_amplifier(0.5, 1.0, 10, 0).is_err());
        assert!(sample_amplifier(1.5, -1.0, 10, 0).is_err());
        assert!(sample_amplifier(1.5, 1.0, 1, 0).is_err());
    }
}
