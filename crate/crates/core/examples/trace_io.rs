//! Write a simulated trace in both on-disk formats, read it back and confirm
//! the samples survive bit for bit.
//!
//! cargo run --release --example trace_io

use fastlight::sim::{shot_reference, Trace, TRACE_HEADER_LEN};

fn main() -> fastlight::Result<()> {
    let dir = std::env::temp_dir().join("fastlight-trace-io");
    std::fs::create_dir_all(&dir)?;
    let (trace, _) = shot_reference(5e3, 5e3, 4096, 2.5e9, 3)?;

    let bin = dir.join("probe.fltr");
    trace.save_binary(&bin)?;
    let back = Trace::load_binary(&bin)?;
    println!(
        "binary: {} bytes ({} header + 8 per sample), identical = {}",
        std::fs::metadata(&bin)?.len(),
        TRACE_HEADER_LEN,
        back.samples() == trace.samples()
    );

    let csv = dir.join("probe.csv");
    trace.save_csv(&csv)?;
    let back = Trace::load_csv(&csv, trace.sample_rate(), trace.mean_flux())?;
    let head: Vec<String> = std::fs::read_to_string(&csv)?
        .lines()
        .take(3)
        .map(String::from)
        .collect();
    println!(
        "csv: {}, identical = {}",
        head.join(" | "),
        back.samples() == trace.samples()
    );
    Ok(())
}
