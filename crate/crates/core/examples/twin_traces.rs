//! Synthesize probe/conjugate photocurrent traces with twin-beam
//! correlations and measure their intensity-difference spectrum against a
//! coherent reference of equal power.
//!
//! cargo run --release --example twin_traces

use fastlight::analysis::{average, band_squeezing_db, psd, snu_normalize, WelchConfig};
use fastlight::seeds::derive_seed;
use fastlight::sim::{build_targets, shot_reference, synth_twin_traces, FrequencyGrid};
use fastlight::twin_beam::{gain_for_squeezing, TwinBeamSource};

fn main() -> fastlight::Result<()> {
    let (n, rate, traces) = (1usize << 18, 2.5e9, 8);
    let source = TwinBeamSource::new(gain_for_squeezing(-2.5)?, 1e6)?;
    let targets = build_targets(&source, &FrequencyGrid::for_trace(n, rate)?)?;
    let (mp, mc) = source.means();
    let welch = WelchConfig {
        segment_len: 1 << 14,
        ..WelchConfig::default()
    };

    let (mut diff, mut shot) = (Vec::new(), Vec::new());
    for t in 0..traces {
        let (p, c) = synth_twin_traces(&targets, n, rate, mp, mc, derive_seed(1, &[t, 0]))?;
        diff.push(psd(&p.difference(&c)?, &welch)?);
        let (rp, rc) = shot_reference(mp, mc, n, rate, derive_seed(1, &[t, 1]))?;
        shot.push(psd(&rp.difference(&rc)?, &welch)?);
        if t == 0 {
            println!(
                "probe variance {:.3} SNU, conjugate {:.3} SNU",
                p.variance_snu(),
                c.variance_snu()
            );
        }
    }
    let db = snu_normalize(&average(&diff)?, &average(&shot)?)?;
    for (lo, hi) in [(0.1e6, 3e6), (3e6, 10e6), (12e6, 30e6), (50e6, 200e6)] {
        println!(
            "{:>6.1}-{:<6.1} MHz: {:+.2} dB",
            lo / 1e6,
            hi / 1e6,
            band_squeezing_db(&db, lo, hi)?
        );
    }
    Ok(())
}
