use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::fft;
use crate::twin_beam::TwinBeamSource;

/// Non-negative frequencies at which targets are specified.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    frequencies: Vec<f64>,
    sample_rate: f64,
}

impl FrequencyGrid {
    pub fn new(frequencies: Vec<f64>, sample_rate: f64) -> Result<Self> {
        ensure(
            sample_rate.is_finite() && sample_rate > 0.0,
            "sample_rate",
            || format!("must be > 0, got {sample_rate}"),
        )?;
        ensure(!frequencies.is_empty(), "grid", || {
            "empty frequency grid".into()
        })?;
        ensure(frequencies.windows(2).all(|w| w[0] < w[1]), "grid", || {
            "frequencies must be strictly increasing".into()
        })?;
        let nyquist = sample_rate / 2.0;
        let (first, last) = (frequencies[0], frequencies[frequencies.len() - 1]);
        ensure(first >= 0.0, "grid", || {
            format!("negative frequency {first}")
        })?;
        ensure(last <= nyquist * (1.0 + 1e-12), "grid", || {
            format!("frequency {last} Hz exceeds Nyquist {nyquist} Hz")
        })?;
        Ok(FrequencyGrid {
            frequencies,
            sample_rate,
        })
    }

    /// The bins of a one-sided transform of `n_samples` at `sample_rate`.
    pub fn for_trace(n_samples: usize, sample_rate: f64) -> Result<Self> {
        ensure(
            n_samples >= 2 && n_samples.is_power_of_two(),
            "n_samples",
            || format!("must be a power of two >= 2, got {n_samples}"),
        )?;
        FrequencyGrid::new(fft::bin_frequencies(n_samples, sample_rate), sample_rate)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// True if this grid is exactly the bin grid of `n_samples` at `sample_rate`.
    pub fn matches_trace(&self, n_samples: usize, sample_rate: f64) -> bool {
        self.sample_rate == sample_rate
            && self.frequencies.len() == n_samples / 2 + 1
            && self.frequencies == fft::bin_frequencies(n_samples, sample_rate)
    }
}

/// Per-bin probe/conjugate PSD matrix in shot-noise units of each beam. The
/// cross term is normalized by the geometric mean of the two shot levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTargets {
    pub grid: FrequencyGrid,
    pub s_pp: Vec<f64>,
    pub s_cc: Vec<f64>,
    pub s_pc: Vec<Complex64>,
}

impl SpectralTargets {
    /// Two independent shot-noise-limited beams.
    pub fn coherent(grid: FrequencyGrid) -> Self {
        let n = grid.len();
        SpectralTargets {
            grid,
            s_pp: vec![1.0; n],
            s_cc: vec![1.0; n],
            s_pc: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Difference PSD in units of the total shot noise when the beams have
    /// mean fluxes `mean_p` and `mean_c`.
    pub fn difference_snu(&self, mean_p: f64, mean_c: f64) -> Vec<f64> {
        let cross = 2.0 * (mean_p * mean_c).sqrt();
        (0..self.grid.len())
            .map(|k| {
                (mean_p * self.s_pp[k] + mean_c * self.s_cc[k] - cross * self.s_pc[k].re)
                    / (mean_p + mean_c)
            })
            .collect()
    }

    /// Smallest eigenvalue of each bin's 2×2 PSD matrix.
    pub fn min_eigenvalues(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|k| {
                let (a, d) = (self.s_pp[k], self.s_cc[k]);
                let half_trace = 0.5 * (a + d);
                let det = a * d - self.s_pc[k].norm_sqr();
                half_trace - (half_trace * half_trace - det).max(0.0).sqrt()
            })
            .collect()
    }
}

/// PSD targets of a seeded twin-beam pair: in the correlated band each beam
/// carries `2G₁−1` SNU and the cross term brings the difference down to
/// `1/(2G₁−1)`; outside it both relax to the shot-noise floor.
pub fn build_targets(source: &TwinBeamSource, grid: &FrequencyGrid) -> Result<SpectralTargets> {
    source.validate()?;
    let g1 = source.gain1;
    let pair = 2.0 * (g1 * (g1 - 1.0)).sqrt();
    let mut s_pp = Vec::with_capacity(grid.len());
    let mut s_pc = Vec::with_capacity(grid.len());
    for &f in grid.frequencies() {
        let w = source.correlation_weight(f);
        s_pp.push(1.0 + 2.0 * (g1 - 1.0) * w);
        s_pc.push(Complex64::new(pair * w, 0.0));
    }
    Ok(SpectralTargets {
        grid: grid.clone(),
        s_cc: s_pp.clone(),
        s_pp,
        s_pc,
    })
}
