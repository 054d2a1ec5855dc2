use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fastlight::scenario::{load_config, preset, run_scenario, ScenarioConfig, ScenarioKind};
use fastlight::Error;

#[derive(Parser)]
#[command(
    name = "fastlight",
    version,
    long_version = concat!(
        env!("CARGO_PKG_VERSION"),
        "\ntrace format: FLTR v1\nrng: ChaCha8, seeds derived per point, trace and stream"
    ),
    about = "Twin-beam fast-light simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gain, group index and difference noise across the gain line.
    LineScan(Common),
    /// Correlation delays and band squeezing versus detuning.
    DelayScan(Common),
    /// Reference and advanced cross-correlations at the operating detuning.
    Xcorr(Common),
    /// Fast internal consistency checks.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// JSON scenario file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset: fig2-line, fig4-advance, coherent-ref.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Traces averaged per scan point.
    #[arg(long)]
    traces: Option<usize>,
    /// Samples per trace (power of two).
    #[arg(long)]
    samples: Option<usize>,
    /// Sample rate in Hz.
    #[arg(long)]
    rate: Option<f64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn build_config(kind: ScenarioKind, args: &Common) -> fastlight::Result<ScenarioConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(&path.to_string_lossy())?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset(match kind {
            ScenarioKind::LineScan | ScenarioKind::Selftest => "fig2-line",
            ScenarioKind::DelayScan | ScenarioKind::Xcorr => "fig4-advance",
        })?,
    };
    cfg.scenario = kind;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(traces) = args.traces {
        cfg.sampling.traces = traces;
    }
    if let Some(samples) = args.samples {
        cfg.sampling.samples = samples;
        cfg.sampling.welch_segment = cfg.sampling.welch_segment.min(samples);
    }
    if let Some(rate) = args.rate {
        cfg.sampling.rate_hz = rate;
    }
    cfg.validate().map_err(|e| Error::Config {
        origin: "command line".into(),
        message: e.to_string(),
    })?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::LineScan(a) => (ScenarioKind::LineScan, a),
        Command::DelayScan(a) => (ScenarioKind::DelayScan, a),
        Command::Xcorr(a) => (ScenarioKind::Xcorr, a),
        Command::Selftest(a) => (ScenarioKind::Selftest, a),
    };
    let cfg = match build_config(kind, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let run = || run_scenario(&cfg);
    let result = match args.jobs {
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start {jobs} worker threads: {e}");
                return ExitCode::from(2);
            }
        },
        None => run(),
    };
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("{}", cfg.out_dir.join(&f.name).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
