//! End-to-end advancement of twin-beam correlations: run the `fig4-advance`
//! scenario at reduced size, then the same pipeline at line center, and
//! compare correlation peak shifts and band squeezing.
//!
//! cargo run --release --example fast_light_advance [traces]

use fastlight::scenario::{compute_scenario, preset};

fn main() -> fastlight::Result<()> {
    let traces = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(10);
    let mut wing = preset("fig4-advance")?;
    wing.sampling.traces = traces;
    let mut center = wing.clone();
    center.operating_detuning_hz = 0.0;

    for (label, cfg) in [("wing", &wing), ("center", &center)] {
        let report = compute_scenario(cfg)?;
        let get = |k: &str| report.summary_f64(k).unwrap_or(f64::NAN);
        println!(
            "{label:>6}: offset {:>6.2} MHz, G = {:>7.3}, predicted ΔT {:>+8.2} ns, \
             measured Δt {:>+8.2} ns (full band {:>+7.2} ns), band noise {:>+7.3} dB (theory {:>+7.3} dB)",
            cfg.operating_detuning_hz / 1e6,
            get("gain_at_operating"),
            get("peak_advance_s") * 1e9,
            get("delay_s_band") * 1e9,
            get("delay_s_fullband") * 1e9,
            get("squeezing_db_band"),
            get("analytic_squeezing_db"),
        );
    }
    Ok(())
}
