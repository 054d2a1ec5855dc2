use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{ScenarioConfig, ScenarioKind};
use super::selftest;
use crate::analysis::{
    psd, snu_normalize, BandFilter, PsdAccumulator, Spectrum, WelchConfig, XcorrAccumulator,
    XcorrResult,
};
use crate::channel::{excess_snu, to_db, PairSpectrum};
use crate::dispersion::GainLine;
use crate::error::{Error, Result};
use crate::fft;
use crate::seeds::derive_seed;
use crate::sim::{
    apply_detection, build_targets, propagate_channel, shot_reference, synth_twin_traces,
    FrequencyGrid, SpectralTargets, Trace,
};
use crate::twin_beam::TwinBeamSource;

/// Random streams used for each trace, the last index of its seed path.
pub mod stream {
    pub const SYNTH: u64 = 0;
    pub const CHANNEL: u64 = 1;
    pub const DETECT_PROBE: u64 = 2;
    pub const DETECT_CONJUGATE_REF: u64 = 3;
    pub const DETECT_CONJUGATE_FAST: u64 = 4;
    pub const SHOT: u64 = 5;
}

/// Traces simulated concurrently before their results are folded in order.
const CHUNK: usize = 8;

/// A generated output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

/// Everything a scenario produced, before it is written anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub files: Vec<OutputFile>,
    pub summary: Map<String, Value>,
}

impl ScenarioReport {
    pub fn file(&self, name: &str) -> Option<&OutputFile> {
        self.files.iter().find(|f| f.name == name)
    }

    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    /// Write every file into `dir`, removing what was written if any write
    /// fails.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for file in &self.files {
            let path = dir.join(&file.name);
            if let Err(e) = fs::write(&path, &file.contents) {
                let _ = fs::remove_file(&path);
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(e.into());
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Run `config` and write its outputs to `config.out_dir`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    let report = compute_scenario(config)?;
    report.write_to(&config.out_dir)?;
    Ok(report)
}

/// Run `config` without touching the file system.
pub fn compute_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    config.validate()?;
    let mut summary = Map::new();
    summary.insert("scenario".into(), json!(config.scenario.name()));
    summary.insert("crate_version".into(), json!(env!("CARGO_PKG_VERSION")));
    summary.insert("master_seed".into(), json!(config.seed));
    summary.insert("config_hash".into(), json!(config.hash()));
    let mut echo = serde_json::to_value(config).expect("config serializes");
    if let Value::Object(fields) = &mut echo {
        fields.remove("out_dir");
    }
    summary.insert("config".into(), echo);
    summary.insert("rate_hz".into(), json!(config.sampling.rate_hz));
    summary.insert("samples".into(), json!(config.sampling.samples));
    summary.insert("traces".into(), json!(config.sampling.traces));

    let mut files = match config.scenario {
        ScenarioKind::LineScan => line_scan(config, &mut summary)?,
        ScenarioKind::DelayScan => delay_scan(config, &mut summary)?,
        ScenarioKind::Xcorr => xcorr(config, &mut summary)?,
        ScenarioKind::Selftest => selftest::run(config, &mut summary)?,
    };
    let text =
        serde_json::to_string_pretty(&Value::Object(summary.clone())).expect("summary serializes");
    files.push(OutputFile {
        name: "summary.json".into(),
        contents: (text + "\n").into_bytes(),
    });
    Ok(ScenarioReport { files, summary })
}

/// Seed of scan point `index`.
pub fn point_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, &[index as u64])
}

fn record_points(summary: &mut Map<String, Value>, config: &ScenarioConfig, detunings: &[f64]) {
    summary.insert("detunings_hz".into(), json!(detunings));
    let seeds: Vec<u64> = (0..detunings.len())
        .map(|i| point_seed(config.seed, i))
        .collect();
    summary.insert("point_seeds".into(), json!(seeds));
}

/// What to measure at each scan point.
#[derive(Debug, Clone, Copy)]
struct Wants {
    noise_band: (f64, f64),
    correlations: bool,
    reference_squeezing: bool,
}

/// Averaged results at one detuning.
struct PointResult {
    gain: f64,
    noise_band_db: f64,
    analytic_band_db: f64,
    reference_band_db: Option<f64>,
    band_ref: Option<XcorrResult>,
    band_fast: Option<XcorrResult>,
    full_ref: Option<XcorrResult>,
    full_fast: Option<XcorrResult>,
}

struct Partial {
    fast: PsdAccumulator,
    shot: PsdAccumulator,
    reference: PsdAccumulator,
    shot_ref: PsdAccumulator,
    xc: Option<[XcorrAccumulator; 4]>,
}

struct PointContext<'a> {
    config: &'a ScenarioConfig,
    line: GainLine,
    offset: f64,
    seed: u64,
    targets: &'a SpectralTargets,
    means: (f64, f64),
    channel_excess_db: f64,
    welch: WelchConfig,
    wants: Wants,
    xc_template: Option<[XcorrAccumulator; 4]>,
}

impl PointContext<'_> {
    fn stream(&self, trace: usize, k: u64) -> u64 {
        derive_seed(self.seed, &[trace as u64, k])
    }

    fn simulate(&self, t: usize) -> Result<Partial> {
        let s = &self.config.sampling;
        let eta = self.config.detection.eta;
        let (mean_p, mean_c) = self.means;
        let (p, c) = synth_twin_traces(
            self.targets,
            s.samples,
            s.rate_hz,
            mean_p,
            mean_c,
            self.stream(t, stream::SYNTH),
        )?;
        let fast = propagate_channel(
            &c,
            &self.line,
            self.offset,
            self.channel_excess_db,
            self.stream(t, stream::CHANNEL),
        )?;
        let p_d = apply_detection(&p, eta, self.stream(t, stream::DETECT_PROBE))?;
        let fast_d = apply_detection(&fast, eta, self.stream(t, stream::DETECT_CONJUGATE_FAST))?;

        let mut out = Partial {
            fast: PsdAccumulator::new(),
            shot: PsdAccumulator::new(),
            reference: PsdAccumulator::new(),
            shot_ref: PsdAccumulator::new(),
            xc: None,
        };
        out.fast.add(psd(&p_d.difference(&fast_d)?, &self.welch)?)?;
        out.shot
            .add(self.shot_psd(&p_d, &fast_d, self.stream(t, stream::SHOT))?)?;

        if self.wants.correlations || self.wants.reference_squeezing {
            let ref_d = apply_detection(&c, eta, self.stream(t, stream::DETECT_CONJUGATE_REF))?;
            if self.wants.reference_squeezing {
                out.reference
                    .add(psd(&p_d.difference(&ref_d)?, &self.welch)?)?;
                // a second independent stream keeps the two references uncorrelated
                let seed = derive_seed(self.stream(t, stream::SHOT), &[1]);
                out.shot_ref.add(self.shot_psd(&p_d, &ref_d, seed)?)?;
            }
            if let Some(template) = &self.xc_template {
                let xp = fft::forward(p_d.samples());
                let xr = fft::forward(ref_d.samples());
                let xf = fft::forward(fast_d.samples());
                let mut acc = template.each_ref().map(XcorrAccumulator::empty_like);
                acc[0].add_spectra(&xp, &xr)?;
                acc[1].add_spectra(&xp, &xf)?;
                acc[2].add_spectra(&xp, &xr)?;
                acc[3].add_spectra(&xp, &xf)?;
                out.xc = Some(acc);
            }
        }
        Ok(out)
    }

    /// Difference spectrum of coherent beams with the powers of `a` and `b`.
    fn shot_psd(&self, a: &Trace, b: &Trace, seed: u64) -> Result<Spectrum> {
        let (rp, rc) =
            shot_reference(a.mean_flux(), b.mean_flux(), a.len(), a.sample_rate(), seed)?;
        psd(&rp.difference(&rc)?, &self.welch)
    }
}

fn merge(into: &mut Partial, part: Partial) -> Result<()> {
    for (a, b) in [
        (&mut into.fast, part.fast),
        (&mut into.shot, part.shot),
        (&mut into.reference, part.reference),
        (&mut into.shot_ref, part.shot_ref),
    ] {
        if let Some(s) = b.mean() {
            a.add(s)?;
        }
    }
    if let (Some(acc), Some(other)) = (into.xc.as_mut(), part.xc.as_ref()) {
        for (a, b) in acc.iter_mut().zip(other) {
            a.merge(b)?;
        }
    }
    Ok(())
}

fn band_mean_db(spec: &Spectrum, band: (f64, f64)) -> Result<f64> {
    crate::analysis::band_squeezing_db(spec, band.0, band.1)
}

/// Simulate every trace at one detuning and average the estimators.
fn measure_point(
    config: &ScenarioConfig,
    line: &GainLine,
    source: &TwinBeamSource,
    targets: &SpectralTargets,
    index: usize,
    detuning_hz: f64,
    wants: Wants,
) -> Result<PointResult> {
    let s = &config.sampling;
    let offset = ScenarioConfig::offset(detuning_hz);
    let gain = line.intensity_gain(offset);
    let (mean_p, mean_c) = source.means();
    let eta = config.detection.eta;
    // flat excess on the difference, expressed in SNU of the amplified conjugate
    let excess = excess_snu(config.detection.excess_noise_db);
    let channel_excess = excess * (mean_p + gain * mean_c) / (eta * gain * mean_c);
    let xc_template = if wants.correlations {
        let full = BandFilter::new(s.rate_hz / s.samples as f64, config.full_band_hi_hz)?;
        let band = config.band.filter()?;
        let make = |b| XcorrAccumulator::new(s.samples, s.rate_hz, config.max_lag_s, Some(b));
        let band_acc = make(band)?;
        let full_acc = make(full)?;
        Some([band_acc.clone(), band_acc, full_acc.clone(), full_acc])
    } else {
        None
    };
    let ctx = PointContext {
        config,
        line: *line,
        offset,
        seed: point_seed(config.seed, index),
        targets,
        means: (mean_p, mean_c),
        channel_excess_db: 10.0 * (1.0 + channel_excess).log10(),
        welch: config.welch(),
        wants,
        xc_template,
    };

    let mut total = Partial {
        fast: PsdAccumulator::new(),
        shot: PsdAccumulator::new(),
        reference: PsdAccumulator::new(),
        shot_ref: PsdAccumulator::new(),
        xc: ctx.xc_template.clone(),
    };
    let traces: Vec<usize> = (0..s.traces).collect();
    for chunk in traces.chunks(CHUNK) {
        let parts: Vec<Result<Partial>> = chunk.par_iter().map(|&t| ctx.simulate(t)).collect();
        for part in parts {
            merge(&mut total, part?)?;
        }
    }

    let fast = total.fast.mean().expect("at least one trace");
    let shot = total.shot.mean().expect("at least one trace");
    let noise_db = snu_normalize(&fast, &shot)?;
    let noise_band_db = band_mean_db(&noise_db, wants.noise_band)?;
    let reference_band_db = match (total.reference.mean(), total.shot_ref.mean()) {
        (Some(r), Some(sr)) => Some(band_mean_db(&snu_normalize(&r, &sr)?, wants.noise_band)?),
        _ => None,
    };

    let range = noise_db.band_indices(wants.noise_band.0, wants.noise_band.1);
    let freqs = &noise_db.frequencies[range];
    let analytic_band_db = to_db(analytic_band_noise(config, line, source, offset, freqs)?);

    let results = total.xc.map(|acc| acc.map(|a| a.result()));
    let [band_ref, band_fast, full_ref, full_fast] = match results {
        Some([a, b, c, d]) => [Some(a), Some(b), Some(c), Some(d)],
        None => [None, None, None, None],
    };
    Ok(PointResult {
        gain,
        noise_band_db,
        analytic_band_db,
        reference_band_db,
        band_ref,
        band_fast,
        full_ref,
        full_fast,
    })
}

/// Closed-form difference noise averaged over `freqs`, linear SNU.
pub fn analytic_band_noise(
    config: &ScenarioConfig,
    line: &GainLine,
    source: &TwinBeamSource,
    offset: f64,
    freqs: &[f64],
) -> Result<f64> {
    if freqs.is_empty() {
        return Err(Error::invalid("band", "no spectral bins in the band"));
    }
    let (eta, excess) = (config.detection.eta, config.detection.excess_noise_db);
    let mut sum = 0.0;
    for &f in freqs {
        sum += if config.source.coherent {
            let (np, nc) = source.means();
            PairSpectrum {
                mean_p: np,
                mean_c: nc,
                s_p: 1.0,
                s_c: 1.0,
                s_pc: 0.0,
            }
            .difference_noise(line, offset, f, eta, excess)?
        } else {
            crate::channel::difference_noise_spectrum(source, line, offset, f, eta, excess)?
        };
    }
    Ok(sum / freqs.len() as f64)
}

fn scenario_targets(config: &ScenarioConfig, source: &TwinBeamSource) -> Result<SpectralTargets> {
    let grid = FrequencyGrid::for_trace(config.sampling.samples, config.sampling.rate_hz)?;
    if config.source.coherent {
        Ok(SpectralTargets::coherent(grid))
    } else {
        build_targets(source, &grid)
    }
}

fn band_tuple(b: &super::config::Band) -> (f64, f64) {
    (b.f_lo_hz, b.f_hi_hz)
}

fn csv_file(name: &str, header: &str, rows: &[Vec<f64>]) -> OutputFile {
    let mut text = String::with_capacity(rows.len() * 64);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(text, "{}", cells.join(","));
    }
    OutputFile {
        name: name.into(),
        contents: text.into_bytes(),
    }
}

fn line_scan(config: &ScenarioConfig, summary: &mut Map<String, Value>) -> Result<Vec<OutputFile>> {
    let line = config.gain_line()?;
    let source = config.twin_source()?;
    let targets = scenario_targets(config, &source)?;
    let wants = Wants {
        noise_band: band_tuple(&config.line_scan_band),
        correlations: false,
        reference_squeezing: false,
    };
    let mut rows = Vec::with_capacity(config.detunings_hz.len());
    for (i, &d) in config.detunings_hz.iter().enumerate() {
        let point = measure_point(config, &line, &source, &targets, i, d, wants)?;
        let offset = ScenarioConfig::offset(d);
        rows.push(vec![
            d,
            line.intensity_gain_db(offset),
            point.analytic_band_db,
            point.noise_band_db,
            line.group_index(offset),
        ]);
    }
    record_points(summary, config, &config.detunings_hz);
    summary.insert(
        "noise_band_hz".into(),
        json!([config.line_scan_band.f_lo_hz, config.line_scan_band.f_hi_hz]),
    );
    Ok(vec![csv_file(
        "line_scan.csv",
        "detuning_hz,gain_db,predicted_noise_db,simulated_noise_db,group_index",
        &rows,
    )])
}

fn delay_scan(
    config: &ScenarioConfig,
    summary: &mut Map<String, Value>,
) -> Result<Vec<OutputFile>> {
    let line = config.gain_line()?;
    let source = config.twin_source()?;
    let targets = scenario_targets(config, &source)?;
    let wants = Wants {
        noise_band: band_tuple(&config.band),
        correlations: true,
        reference_squeezing: false,
    };
    let mut rows = Vec::with_capacity(config.detunings_hz.len());
    for (i, &d) in config.detunings_hz.iter().enumerate() {
        let point = measure_point(config, &line, &source, &targets, i, d, wants)?;
        let full = crate::analysis::peak_delay(
            point.full_fast.as_ref().unwrap(),
            point.full_ref.as_ref().unwrap(),
        )?;
        let band = crate::analysis::peak_delay(
            point.band_fast.as_ref().unwrap(),
            point.band_ref.as_ref().unwrap(),
        )?;
        rows.push(vec![
            d,
            full,
            band,
            point.noise_band_db,
            point.analytic_band_db,
        ]);
    }
    record_points(summary, config, &config.detunings_hz);
    summary.insert(
        "band_hz".into(),
        json!([config.band.f_lo_hz, config.band.f_hi_hz]),
    );
    Ok(vec![csv_file(
        "delay_scan.csv",
        "detuning_hz,delay_s_fullband,delay_s_band,squeezing_db_band,analytic_squeezing_db",
        &rows,
    )])
}

fn xcorr(config: &ScenarioConfig, summary: &mut Map<String, Value>) -> Result<Vec<OutputFile>> {
    let line = config.gain_line()?;
    let source = config.twin_source()?;
    let targets = scenario_targets(config, &source)?;
    let wants = Wants {
        noise_band: band_tuple(&config.band),
        correlations: true,
        reference_squeezing: true,
    };
    let d = config.operating_detuning_hz;
    let point = measure_point(config, &line, &source, &targets, 0, d, wants)?;
    let (band_ref, band_fast) = (point.band_ref.unwrap(), point.band_fast.unwrap());
    let (full_ref, full_fast) = (point.full_ref.unwrap(), point.full_fast.unwrap());
    let offset = ScenarioConfig::offset(d);

    record_points(summary, config, &[d]);
    let entries = [
        ("operating_detuning_hz", json!(d)),
        ("gain_at_operating", json!(point.gain)),
        ("peak_advance_s", json!(line.peak_advance(offset))),
        ("group_index", json!(line.group_index(offset))),
        ("peak_lag_ref_s", json!(band_ref.peak_lag)),
        ("peak_lag_fast_s", json!(band_fast.peak_lag)),
        (
            "delay_s_band",
            json!(crate::analysis::peak_delay(&band_fast, &band_ref).ok()),
        ),
        (
            "delay_s_fullband",
            json!(crate::analysis::peak_delay(&full_fast, &full_ref).ok()),
        ),
        ("fwhm_ref_s", json!(band_ref.fwhm)),
        ("fwhm_fast_s", json!(band_fast.fwhm)),
        ("peak_ref", json!(band_ref.peak_value())),
        ("peak_fast", json!(band_fast.peak_value())),
        ("squeezing_db_band", json!(point.noise_band_db)),
        ("squeezing_db_band_ref", json!(point.reference_band_db)),
        ("analytic_squeezing_db", json!(point.analytic_band_db)),
        ("band_hz", json!([config.band.f_lo_hz, config.band.f_hi_hz])),
    ];
    for (k, v) in entries {
        summary.insert(k.into(), v);
    }
    let rows: Vec<Vec<f64>> = band_ref
        .lags
        .iter()
        .zip(band_ref.values.iter().zip(&band_fast.values))
        .map(|(&lag, (&r, &f))| vec![lag, r, f])
        .collect();
    Ok(vec![csv_file("xcorr.csv", "lag_s,c_ref,c_fast", &rows)])
}
