use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{BandFilter, WelchConfig, Window};
use crate::channel::{DEFAULT_ETA, DEFAULT_EXCESS_NOISE_DB};
use crate::dispersion::{angular_frequency, calibrate, line_for_advance, GainLine, D1_WAVELENGTH};
use crate::error::{ensure, Error, Result};
use crate::twin_beam::{
    gain_for_squeezing, TwinBeamSource, DEFAULT_PAIR_BANDWIDTH, DEFAULT_ROLLOFF,
};

/// Names of the built-in presets.
pub const PRESETS: [&str; 3] = ["fig2-line", "fig4-advance", "coherent-ref"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    LineScan,
    DelayScan,
    Xcorr,
    Selftest,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::LineScan => "line-scan",
            ScenarioKind::DelayScan => "delay-scan",
            ScenarioKind::Xcorr => "xcorr",
            ScenarioKind::Selftest => "selftest",
        }
    }
}

/// How the gain line is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LineSpec {
    /// Raw Lorentzian parameters.
    Explicit(GainLine),
    /// Peak gain and dB full width at half maximum.
    Calibrated {
        peak_gain_db: f64,
        fwhm_hz: f64,
        length_m: f64,
        #[serde(default = "default_wavelength")]
        wavelength_m: f64,
    },
    /// Gain and peak advance prescribed at an offset of `x_operating`
    /// half widths from line center.
    Advance {
        advance_s: f64,
        gain_at_operating: f64,
        x_operating: f64,
        length_m: f64,
        #[serde(default = "default_wavelength")]
        wavelength_m: f64,
    },
}

fn default_wavelength() -> f64 {
    D1_WAVELENGTH
}

impl LineSpec {
    pub fn build(&self) -> Result<GainLine> {
        match *self {
            LineSpec::Explicit(line) => {
                line.validate()?;
                Ok(line)
            }
            LineSpec::Calibrated {
                peak_gain_db,
                fwhm_hz,
                length_m,
                wavelength_m,
            } => calibrate(peak_gain_db, fwhm_hz, length_m, carrier(wavelength_m)?),
            LineSpec::Advance {
                advance_s,
                gain_at_operating,
                x_operating,
                length_m,
                wavelength_m,
            } => line_for_advance(
                advance_s,
                gain_at_operating,
                x_operating,
                length_m,
                carrier(wavelength_m)?,
            ),
        }
    }
}

fn carrier(wavelength: f64) -> Result<f64> {
    ensure(
        wavelength.is_finite() && wavelength > 0.0,
        "wavelength_m",
        || format!("must be > 0, got {wavelength}"),
    )?;
    Ok(angular_frequency(wavelength))
}

/// Twin-beam source; give either `gain1` or the input `squeezing_db`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezing_db: Option<f64>,
    pub seed_flux: f64,
    #[serde(default = "default_pair_bandwidth")]
    pub pair_bandwidth_hz: f64,
    #[serde(default = "default_rolloff")]
    pub rolloff_hz: f64,
    /// Replace the pair by independent coherent beams of the same powers.
    #[serde(default)]
    pub coherent: bool,
}

fn default_pair_bandwidth() -> f64 {
    DEFAULT_PAIR_BANDWIDTH
}

fn default_rolloff() -> f64 {
    DEFAULT_ROLLOFF
}

impl SourceSpec {
    pub fn build(&self) -> Result<TwinBeamSource> {
        let gain1 = match (self.gain1, self.squeezing_db) {
            (Some(g), None) => g,
            (None, Some(db)) => gain_for_squeezing(db)?,
            _ => {
                return Err(Error::invalid(
                    "source",
                    "exactly one of `gain1` and `squeezing_db` must be given",
                ))
            }
        };
        let source = TwinBeamSource {
            gain1,
            seed_flux: self.seed_flux,
            pair_bandwidth: self.pair_bandwidth_hz,
            rolloff: self.rolloff_hz,
        };
        source.validate()?;
        ensure(gain1 > 1.0, "gain1", || {
            "must exceed 1 so that the conjugate beam carries light".into()
        })?;
        Ok(source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    pub eta: f64,
    pub excess_noise_db: f64,
}

impl Default for DetectionSpec {
    fn default() -> Self {
        DetectionSpec {
            eta: DEFAULT_ETA,
            excess_noise_db: DEFAULT_EXCESS_NOISE_DB,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub rate_hz: f64,
    pub samples: usize,
    pub traces: usize,
    #[serde(default = "default_segment")]
    pub welch_segment: usize,
}

fn default_segment() -> usize {
    crate::analysis::DEFAULT_SEGMENT_LEN
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            rate_hz: 2.5e9,
            samples: 1 << 20,
            traces: 100,
            welch_segment: default_segment(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
}

impl Band {
    pub fn filter(&self) -> Result<BandFilter> {
        BandFilter::new(self.f_lo_hz, self.f_hi_hz)
    }
}

/// A complete, self-contained run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub line: LineSpec,
    pub source: SourceSpec,
    #[serde(default)]
    pub detection: DetectionSpec,
    #[serde(default)]
    pub sampling: SamplingSpec,
    /// Carrier offsets from line center scanned by line-scan and delay-scan, Hz.
    pub detunings_hz: Vec<f64>,
    /// Carrier offset used by xcorr, Hz.
    pub operating_detuning_hz: f64,
    /// Band for squeezing and filtered correlations.
    #[serde(default = "default_band")]
    pub band: Band,
    /// Band for the line-scan noise column.
    #[serde(default = "default_line_scan_band")]
    pub line_scan_band: Band,
    /// Upper edge of the full-spectrum delay filter.
    #[serde(default = "default_full_band_hi")]
    pub full_band_hi_hz: f64,
    #[serde(default = "default_max_lag")]
    pub max_lag_s: f64,
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_band() -> Band {
    Band {
        f_lo_hz: 100e3,
        f_hi_hz: 3e6,
    }
}

fn default_line_scan_band() -> Band {
    Band {
        f_lo_hz: 500e3,
        f_hi_hz: 1e6,
    }
}

fn default_full_band_hi() -> f64 {
    20e6
}

fn default_max_lag() -> f64 {
    1e-6
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.line.build()?;
        self.source.build()?;
        crate::channel::ChannelParams {
            gain2: 1.0,
            eta: self.detection.eta,
            excess_noise_db: self.detection.excess_noise_db,
        }
        .validate()?;
        let s = &self.sampling;
        ensure(s.rate_hz.is_finite() && s.rate_hz > 0.0, "rate_hz", || {
            format!("must be > 0, got {}", s.rate_hz)
        })?;
        ensure(
            s.samples >= 4 && s.samples.is_power_of_two(),
            "samples",
            || format!("must be a power of two >= 4, got {}", s.samples),
        )?;
        ensure(s.traces >= 1, "traces", || "must be >= 1".into())?;
        WelchConfig {
            segment_len: s.welch_segment,
            overlap: 0.5,
            window: Window::Hann,
        }
        .validate(s.samples)?;
        let nyquist = s.rate_hz / 2.0;
        for (name, band) in [
            ("band", &self.band),
            ("line_scan_band", &self.line_scan_band),
        ] {
            band.filter()?;
            ensure(band.f_lo_hz < nyquist, name, || {
                format!("f_lo {} Hz is above Nyquist {nyquist} Hz", band.f_lo_hz)
            })?;
        }
        ensure(
            self.full_band_hi_hz.is_finite() && self.full_band_hi_hz > s.rate_hz / s.samples as f64,
            "full_band_hi_hz",
            || format!("must exceed the bin spacing, got {}", self.full_band_hi_hz),
        )?;
        ensure(
            self.max_lag_s.is_finite() && self.max_lag_s > 0.0,
            "max_lag_s",
            || format!("must be > 0, got {}", self.max_lag_s),
        )?;
        ensure(
            (self.max_lag_s * s.rate_hz).round() < (s.samples / 2) as f64,
            "max_lag_s",
            || "lag window must be shorter than half a trace".into(),
        )?;
        ensure(
            self.detunings_hz.iter().all(|d| d.is_finite()),
            "detunings_hz",
            || "all detunings must be finite".into(),
        )?;
        ensure(
            self.operating_detuning_hz.is_finite(),
            "operating_detuning_hz",
            || "must be finite".into(),
        )?;
        if matches!(
            self.scenario,
            ScenarioKind::LineScan | ScenarioKind::DelayScan
        ) {
            ensure(!self.detunings_hz.is_empty(), "detunings_hz", || {
                "scans need at least one detuning".into()
            })?;
        }
        Ok(())
    }

    pub fn gain_line(&self) -> Result<GainLine> {
        self.line.build()
    }

    pub fn twin_source(&self) -> Result<TwinBeamSource> {
        self.source.build()
    }

    /// Detuning in Hz as a carrier offset in rad/s.
    pub fn offset(detuning_hz: f64) -> f64 {
        2.0 * PI * detuning_hz
    }

    pub fn welch(&self) -> WelchConfig {
        WelchConfig {
            segment_len: self.sampling.welch_segment,
            overlap: 0.5,
            window: Window::Hann,
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn fig2_line() -> LineSpec {
    LineSpec::Calibrated {
        peak_gain_db: 7.5,
        fwhm_hz: 10e6,
        length_m: 0.025,
        wavelength_m: D1_WAVELENGTH,
    }
}

fn base(line: LineSpec, detunings_hz: Vec<f64>, operating_detuning_hz: f64) -> ScenarioConfig {
    ScenarioConfig {
        scenario: ScenarioKind::DelayScan,
        line,
        source: SourceSpec {
            gain1: None,
            squeezing_db: Some(-2.5),
            seed_flux: 1e6,
            pair_bandwidth_hz: DEFAULT_PAIR_BANDWIDTH,
            rolloff_hz: DEFAULT_ROLLOFF,
            coherent: false,
        },
        detection: DetectionSpec::default(),
        sampling: SamplingSpec::default(),
        detunings_hz,
        operating_detuning_hz,
        band: default_band(),
        line_scan_band: default_line_scan_band(),
        full_band_hi_hz: default_full_band_hi(),
        max_lag_s: default_max_lag(),
        seed: 20_100_101,
        out_dir: default_out_dir(),
    }
}

fn steps(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as i64;
    (0..=n).map(|i| from + i as f64 * step).collect()
}

/// Operating offset of the `fig4-advance` preset in half widths γ.
pub const ADVANCE_X_OPERATING: f64 = 4.0;

/// Built-in scenarios.
///
/// * `fig2-line`: 7.5 dB peak gain, 10 MHz FWHM, 25 mm cell, input pair at
///   −2.5 dB; scans ±30 MHz in 1 MHz steps and operates on the anomalous
///   wing at `√3·FWHM/2`.
/// * `fig4-advance`: a narrower line with 1.25 gain and a −12 ns peak
///   advance at four half widths from center, the operating point.
/// * `coherent-ref`: `fig2-line` with the pair replaced by coherent beams.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "fig2-line" => Ok(base(
            fig2_line(),
            steps(-30e6, 30e6, 1e6),
            3f64.sqrt() * 5e6,
        )),
        "fig4-advance" => {
            let line = LineSpec::Advance {
                advance_s: -12e-9,
                gain_at_operating: 1.25,
                x_operating: ADVANCE_X_OPERATING,
                length_m: 0.025,
                wavelength_m: D1_WAVELENGTH,
            };
            let gamma = line.build()?.gamma;
            let operating = ADVANCE_X_OPERATING * gamma / (2.0 * PI);
            let mut cfg = base(line, steps(-12e6, 12e6, 1e6), operating);
            cfg.scenario = ScenarioKind::Xcorr;
            Ok(cfg)
        }
        "coherent-ref" => {
            let mut cfg = base(fig2_line(), steps(-30e6, 30e6, 1e6), 0.0);
            cfg.source.coherent = true;
            cfg.scenario = ScenarioKind::LineScan;
            Ok(cfg)
        }
        other => Err(Error::Config {
            origin: "preset".into(),
            message: format!(
                "unknown preset `{other}`; known presets: {}",
                PRESETS.join(", ")
            ),
        }),
    }
}

/// Parse and validate a JSON config document.
pub fn parse_config(text: &str, origin: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        origin: origin.into(),
        message: format!("line {}, column {}: {e}", e.line(), e.column()),
    })?;
    cfg.validate().map_err(|e| Error::Config {
        origin: origin.into(),
        message: e.to_string(),
    })?;
    Ok(cfg)
}

/// Load a config from a JSON file, or a preset when `source` names one.
pub fn load_config(source: &str) -> Result<ScenarioConfig> {
    if PRESETS.contains(&source) {
        return preset(source);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Error::Config {
            origin: source.into(),
            message: format!(
                "no such file and not a preset (known presets: {})",
                PRESETS.join(", ")
            ),
        });
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        origin: source.into(),
        message: e.to_string(),
    })?;
    parse_config(&text, source)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PRESETS {
            preset(name).unwrap().validate().unwrap();
        }
        assert!(matches!(preset("nope"), Err(Error::Config { .. })));
    }

    #[test]
    fn fig2_line_peak_gain() {
        let line = preset("fig2-line").unwrap().gain_line().unwrap();
        assert!((line.intensity_gain_db(0.0) - 7.5).abs() < 1e-9);
        assert_eq!(preset("fig2-line").unwrap().detunings_hz.len(), 61);
    }

    #[test]
    fn fig4_advance_operating_point() {
        let cfg = preset("fig4-advance").unwrap();
        let line = cfg.gain_line().unwrap();
        let offset = ScenarioConfig::offset(cfg.operating_detuning_hz);
        assert!((line.peak_advance(offset) * 1e9 + 12.0).abs() < 0.1);
        assert!((line.intensity_gain(offset) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_and_hash() {
        let cfg = preset("fig4-advance").unwrap();
        let back = parse_config(&cfg.to_json(), "test").unwrap();
        assert_eq!(back, cfg);
        let mut moved = cfg.clone();
        moved.out_dir = PathBuf::from("elsewhere");
        assert_eq!(moved.hash(), cfg.hash());
        moved.seed += 1;
        assert_ne!(moved.hash(), cfg.hash());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let mut value: serde_json::Value =
            serde_json::from_str(&preset("fig2-line").unwrap().to_json()).unwrap();
        value["sampling"]["tracez"] = 3.into();
        let err = parse_config(&value.to_string(), "cfg.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("tracez"), "{err}");

        let mut value: serde_json::Value =
            serde_json::from_str(&preset("fig2-line").unwrap().to_json()).unwrap();
        value["sampling"]["samples"] = 1000.into();
        let err = parse_config(&value.to_string(), "cfg.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("samples"), "{err}");

        let err = parse_config("{\n  \"scenario\": 3\n}", "cfg.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn source_needs_exactly_one_gain_setting() {
        let mut cfg = preset("fig2-line").unwrap();
        cfg.source.gain1 = Some(1.5);
        assert!(cfg.validate().is_err());
        cfg.source.squeezing_db = None;
        assert!(cfg.validate().is_ok());
    }
}
