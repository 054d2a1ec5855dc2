//! Calibrate the 7.5 dB / 10 MHz line and print gain, group index and peak
//! advance across it, marking where the medium is fast or slow.
//!
//! cargo run --release --example gain_line_scan

use std::f64::consts::PI;

use fastlight::dispersion::{angular_frequency, calibrate, D1_WAVELENGTH};
use fastlight::scenario::gain_fwhm_hz;

fn main() -> fastlight::Result<()> {
    let line = calibrate(7.5, 10e6, 0.025, angular_frequency(D1_WAVELENGTH))?;
    println!(
        "g = {:.4e}, γ/2π = {:.3} MHz, measured dB-FWHM = {:.3} MHz",
        line.g,
        line.gamma / (2.0 * PI * 1e6),
        gain_fwhm_hz(&line) / 1e6
    );
    println!(
        "{:>10} {:>9} {:>12} {:>12}  regime",
        "offset_MHz", "gain_dB", "n_g - 1", "advance_ns"
    );
    for mhz in (-20..=20).step_by(2) {
        let delta = 2.0 * PI * mhz as f64 * 1e6;
        let excess = line.group_index_excess(delta);
        println!(
            "{mhz:>10} {:>9.3} {:>12.3e} {:>12.3}  {}",
            line.intensity_gain_db(delta),
            excess,
            line.peak_advance(delta) * 1e9,
            if excess < 0.0 { "fast" } else { "slow" },
        );
    }
    Ok(())
}
