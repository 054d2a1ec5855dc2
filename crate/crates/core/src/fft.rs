//! Real-FFT helpers with per-thread plan caching.
//!
//! Forward transforms are unnormalized (`X_k = Σ x_n e^{−2πikn/N}`); inverse
//! transforms divide by `N`.

use std::cell::RefCell;

use num_complex::Complex64;
use realfft::RealFftPlanner;

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

/// One-sided spectrum of a real sequence, `N/2 + 1` bins.
pub fn forward(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    let mut input = samples.to_vec();
    let mut output = plan.make_output_vec();
    plan.process(&mut input, &mut output)
        .expect("buffer sizes come from the plan");
    output
}

/// Real sequence of length `n` from its one-sided spectrum. The imaginary
/// parts of the DC and (even `n`) Nyquist bins are ignored.
pub fn inverse(mut spectrum: Vec<Complex64>, n: usize) -> Vec<f64> {
    assert_eq!(spectrum.len(), n / 2 + 1, "spectrum length must be n/2 + 1");
    spectrum[0].im = 0.0;
    if n.is_multiple_of(2) {
        spectrum[n / 2].im = 0.0;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    let mut output = plan.make_output_vec();
    plan.process(&mut spectrum, &mut output)
        .expect("buffer sizes come from the plan");
    let scale = 1.0 / n as f64;
    output.iter_mut().for_each(|v| *v *= scale);
    output
}

/// Bin frequencies of a one-sided spectrum of `n` samples at `sample_rate`.
pub fn bin_frequencies(n: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / n as f64;
    (0..=n / 2).map(|k| k as f64 * df).collect()
}

/// `Σ x²` from a one-sided spectrum of an even-length real sequence.
pub fn energy(spectrum: &[Complex64], n: usize) -> f64 {
    let last = spectrum.len() - 1;
    let mut sum = spectrum[0].norm_sqr();
    for (k, x) in spectrum.iter().enumerate().skip(1) {
        let weight = if k == last && n.is_multiple_of(2) {
            1.0
        } else {
            2.0
        };
        sum += weight * x.norm_sqr();
    }
    sum / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_parseval() {
        let n = 64;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 13) as f64 - 6.0) * 0.3).collect();
        let spec = forward(&x);
        let e: f64 = x.iter().map(|v| v * v).sum();
        assert!((energy(&spec, n) - e).abs() < 1e-10);
        let y = inverse(spec, n);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
