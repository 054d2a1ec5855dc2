//! Recover known delays from band-limited noise with the cross-correlation
//! estimator, including a sub-sample shift, and show the correlation width
//! set by the analysis band.
//!
//! cargo run --release --example delay_estimation

use std::f64::consts::PI;

use num_complex::Complex64;

use fastlight::analysis::{band_filter, cross_correlation};
use fastlight::fft;
use fastlight::sim::{apply_transfer, shot_reference};

fn main() -> fastlight::Result<()> {
    let (n, rate) = (1usize << 18, 2.5e9);
    let (raw, _) = shot_reference(1e4, 1e4, n, rate, 42)?;
    for (lo, hi) in [(1e6, 100e6), (0.1e6, 3e6)] {
        let noise = band_filter(&raw, lo, hi)?;
        println!("band {:.1}-{:.1} MHz", lo / 1e6, hi / 1e6);
        for tau in [-12e-9, 0.2e-9, 12e-9, 40e-9] {
            let shift: Vec<Complex64> = fft::bin_frequencies(n, rate)
                .iter()
                .map(|&f| Complex64::from_polar(1.0, -2.0 * PI * f * tau))
                .collect();
            let c = cross_correlation(&noise, &apply_transfer(&noise, &shift)?, 1e-6)?;
            println!(
                "  injected {:>6.2} ns -> peak {:>8.3} ns, FWHM {}",
                tau * 1e9,
                c.peak()? * 1e9,
                c.fwhm
                    .map_or("n/a".into(), |w| format!("{:.1} ns", w * 1e9)),
            );
        }
    }
    Ok(())
}
