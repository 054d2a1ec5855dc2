//! Whole-scan runs described by a JSON config or a built-in preset.

mod config;
mod run;
mod selftest;

pub use config::{
    load_config, parse_config, preset, Band, DetectionSpec, LineSpec, SamplingSpec, ScenarioConfig,
    ScenarioKind, SourceSpec, ADVANCE_X_OPERATING, PRESETS,
};
pub use run::{
    analytic_band_noise, compute_scenario, point_seed, run_scenario, stream, OutputFile,
    ScenarioReport,
};
pub use selftest::{checks as selftest_checks, gain_fwhm_hz, Check};
