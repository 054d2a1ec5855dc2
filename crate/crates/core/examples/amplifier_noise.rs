//! Monte-Carlo check of phase-insensitive amplifier statistics: sample the
//! output photon number for a coherent input and compare with the closed
//! forms for mean and variance.
//!
//! cargo run --release --example amplifier_noise

use fastlight::channel::{amp_mean, amp_variance};
use fastlight::sim::sample_amplifier;

fn main() -> fastlight::Result<()> {
    let n_in = 1e6;
    println!(
        "{:>6} {:>14} {:>14} {:>8} {:>14} {:>14} {:>8}",
        "G", "mean", "theory", "z", "variance", "theory", "z"
    );
    for (k, gain) in [1.0, 1.1, 1.25, 2.0, 5.62].into_iter().enumerate() {
        let m = sample_amplifier(gain, n_in, 500_000, k as u64)?;
        let (mean, var) = (amp_mean(gain, n_in)?, amp_variance(gain, n_in, n_in)?);
        println!(
            "{gain:>6} {:>14.1} {mean:>14.1} {:>8.2} {:>14.4e} {var:>14.4e} {:>8.2}",
            m.mean,
            (m.mean - mean) / m.se_mean,
            m.variance,
            (m.variance - var) / m.se_variance,
        );
    }
    Ok(())
}
