use std::f64::consts::FRAC_PI_2;

use crate::error::{ensure, Result};
use crate::fft;
use crate::sim::Trace;

/// Width of each raised-cosine edge, in octaves.
pub const EDGE_OCTAVES: f64 = 2.0;

/// Amplitude at the band edges, −3 dB.
fn edge_amplitude() -> f64 {
    10f64.powf(-3.0 / 20.0)
}

/// Zero-phase band-pass with Hann-shaped (raised-cosine) edges laid out on a
/// logarithmic frequency axis. The amplitude response is exactly −3 dB at
/// `f_lo` and `f_hi`, unity between the edges, and zero at DC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandFilter {
    pub f_lo: f64,
    pub f_hi: f64,
    lower_start: f64,
    upper_start: f64,
}

impl BandFilter {
    pub fn new(f_lo: f64, f_hi: f64) -> Result<Self> {
        ensure(f_lo.is_finite() && f_lo > 0.0, "f_lo", || {
            format!("must be > 0, got {f_lo}")
        })?;
        ensure(f_hi.is_finite() && f_hi > f_lo, "f_hi", || {
            format!("must exceed f_lo = {f_lo}, got {f_hi}")
        })?;
        let root = edge_amplitude().sqrt();
        // octaves between the start of each edge and its −3 dB point
        let rise = root.asin() / FRAC_PI_2 * EDGE_OCTAVES;
        let fall = root.acos() / FRAC_PI_2 * EDGE_OCTAVES;
        Ok(BandFilter {
            f_lo,
            f_hi,
            lower_start: f_lo * 2f64.powf(-rise),
            upper_start: f_hi * 2f64.powf(-fall),
        })
    }

    /// Amplitude response at `f` (Hz); even in `f`.
    pub fn response(&self, f: f64) -> f64 {
        let f = f.abs();
        if f == 0.0 {
            return 0.0;
        }
        let rising = {
            let u = (f / self.lower_start).log2() / EDGE_OCTAVES;
            if u <= 0.0 {
                0.0
            } else if u >= 1.0 {
                1.0
            } else {
                (FRAC_PI_2 * u).sin().powi(2)
            }
        };
        let falling = {
            let v = (f / self.upper_start).log2() / EDGE_OCTAVES;
            if v <= 0.0 {
                1.0
            } else if v >= 1.0 {
                0.0
            } else {
                (FRAC_PI_2 * v).cos().powi(2)
            }
        };
        rising * falling
    }

    /// Response on the one-sided bin grid of `n` samples at `sample_rate`.
    pub fn transfer(&self, n: usize, sample_rate: f64) -> Vec<f64> {
        fft::bin_frequencies(n, sample_rate)
            .into_iter()
            .map(|f| self.response(f))
            .collect()
    }

    pub fn apply(&self, trace: &Trace) -> Trace {
        let n = trace.len();
        let h = self.transfer(n, trace.sample_rate());
        let mut spectrum = fft::forward(trace.samples());
        for (x, a) in spectrum.iter_mut().zip(&h) {
            *x *= *a;
        }
        trace.derived(
            fft::inverse(spectrum, n),
            trace.mean_flux(),
            None,
            format!("band({:e},{:e})", self.f_lo, self.f_hi),
        )
    }
}

/// Band-limit `trace` to `[f_lo, f_hi]` with [`BandFilter`].
pub fn band_filter(trace: &Trace, f_lo: f64, f_hi: f64) -> Result<Trace> {
    Ok(BandFilter::new(f_lo, f_hi)?.apply(trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{build_targets, synth_twin_traces, FrequencyGrid};
    use crate::twin_beam::TwinBeamSource;

    fn db(a: f64) -> f64 {
        20.0 * a.log10()
    }

    #[test]
    fn minus_three_db_at_the_edges() {
        let f = BandFilter::new(100e3, 3e6).unwrap();
        assert!((db(f.response(100e3)) + 3.0).abs() < 1e-9);
        assert!((db(f.response(3e6)) + 3.0).abs() < 1e-9);
        assert!((f.response(600e3) - 1.0).abs() < 1e-12);
        assert_eq!(f.response(0.0), 0.0);
        assert_eq!(f.response(-3e6), f.response(3e6));
    }

    #[test]
    fn stopband_beyond_ten_times_f_hi() {
        let f = BandFilter::new(100e3, 3e6).unwrap();
        assert!(db(f.response(30e6).max(1e-300)) <= -40.0);
        assert!(db(f.response(1e3).max(1e-300)) <= -40.0);
    }

    #[test]
    fn response_is_monotone_on_each_edge() {
        let f = BandFilter::new(1e5, 1e6).unwrap();
        let grid: Vec<f64> = (0..2000).map(|i| 1e3 * 1.005f64.powi(i)).collect();
        let peak = grid.iter().position(|&x| x >= 3e5).unwrap();
        for w in grid[..peak].windows(2) {
            assert!(f.response(w[1]) >= f.response(w[0]));
        }
        for w in grid[peak..].windows(2) {
            assert!(f.response(w[1]) <= f.response(w[0]));
        }
    }

    #[test]
    fn rejects_bad_bands() {
        assert!(BandFilter::new(0.0, 1.0).is_err());
        assert!(BandFilter::new(2.0, 1.0).is_err());
        assert!(BandFilter::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn full_band_is_all_pass() {
        let n = 1 << 12;
        let rate = 1e6;
        let grid = FrequencyGrid::for_trace(n, rate).unwrap();
        let t = build_targets(&TwinBeamSource::new(1.0, 1e3).unwrap(), &grid).unwrap();
        let (p, _) = synth_twin_traces(&t, n, rate, 1e3, 1e3, 1).unwrap();
        // lowest edge ends below the first bin, highest starts above Nyquist
        let out = band_filter(&p, 1e-3, 1e9).unwrap();
        let rms = p.variance().sqrt();
        for (a, b) in out.samples().iter().zip(p.samples()) {
            assert!((a - b).abs() < 1e-9 * rms);
        }
    }
}
