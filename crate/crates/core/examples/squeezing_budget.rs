//! Closed-form noise budget: how much of the −2.5 dB input squeezing
//! survives amplification of the conjugate, detector loss and electronic
//! excess, for a flat channel and for the dispersive line at a few offsets.
//!
//! cargo run --release --example squeezing_budget

use std::f64::consts::PI;

use fastlight::channel::{difference_noise_after_channel, difference_noise_spectrum, to_db};
use fastlight::dispersion::{angular_frequency, calibrate, D1_WAVELENGTH};
use fastlight::twin_beam::{gain_for_squeezing, squeezing_db, TwinBeamSource};

fn main() -> fastlight::Result<()> {
    let g1 = gain_for_squeezing(-2.5)?;
    println!(
        "first-stage gain G1 = {g1:.4} ({:.2} dB at the source)",
        squeezing_db(g1)
    );

    println!("\nflat channel, η = 0.95, 0.2 dB excess");
    for g2 in [1.0, 1.05, 1.1, 1.25, 1.5, 2.0] {
        let snu = difference_noise_after_channel(g1, g2, 0.95, 0.2)?;
        println!("  G2 = {g2:<5} -> {:+.3} dB", to_db(snu));
    }

    let line = calibrate(7.5, 10e6, 0.025, angular_frequency(D1_WAVELENGTH))?;
    let source = TwinBeamSource::new(g1, 1e6)?;
    println!("\ndispersive line at 1 MHz sideband");
    for mhz in [0.0, 5.0, 8.66, 12.0, 20.0] {
        let offset = 2.0 * PI * mhz * 1e6;
        let snu = difference_noise_spectrum(&source, &line, offset, 1e6, 0.95, 0.2)?;
        println!(
            "  offset {mhz:>5} MHz, G = {:.3} -> {:+.3} dB",
            line.intensity_gain(offset),
            to_db(snu)
        );
    }
    Ok(())
}
