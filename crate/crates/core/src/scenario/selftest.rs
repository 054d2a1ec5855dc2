//! Quick end-to-end consistency checks runnable from the command line.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::config::ScenarioConfig;
use super::run::OutputFile;
use crate::analysis::{band_filter, cross_correlation, psd, snu_normalize, WelchConfig};
use crate::channel::{difference_noise_after_channel, difference_noise_spectrum};
use crate::dispersion::{angular_frequency, calibrate, GainLine, D1_WAVELENGTH, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::fft;
use crate::seeds::derive_seed;
use crate::sim::{apply_transfer, build_targets, shot_reference, synth_twin_traces, FrequencyGrid};
use crate::twin_beam::{gain_for_squeezing, TwinBeamSource};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        (self.value - self.expected).abs() <= self.tolerance
    }
}

/// Full width at half maximum of the dB gain profile, by bisection.
pub fn gain_fwhm_hz(line: &GainLine) -> f64 {
    let half = line.intensity_gain_db(0.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 100.0 * line.gamma);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if line.intensity_gain_db(mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * lo / (2.0 * PI)
}

pub fn checks(seed: u64) -> Result<Vec<Check>> {
    let omega0 = angular_frequency(D1_WAVELENGTH);
    let line = calibrate(7.5, 10e6, 0.025, omega0)?;
    let mut out = vec![
        Check {
            name: "calibrated_peak_gain_db",
            value: line.intensity_gain_db(0.0),
            expected: 7.5,
            tolerance: 0.01,
        },
        Check {
            name: "calibrated_fwhm_hz",
            value: gain_fwhm_hz(&line),
            expected: 10e6,
            tolerance: 0.005 * 10e6,
        },
    ];

    let worst = (-40..=40)
        .map(|i| i as f64 / 10.0 * line.gamma)
        .map(|offset| {
            let analytic = line.peak_advance(offset);
            (line.transfer_group_delay(offset) - analytic).abs() / analytic.abs().max(1e-15)
        })
        .fold(0.0, f64::max);
    out.push(Check {
        name: "transfer_phase_slope_rel_error",
        value: worst,
        expected: 0.0,
        tolerance: 0.05,
    });

    let g1 = gain_for_squeezing(-2.5)?;
    let source = TwinBeamSource::new(g1, 1e6)?;
    let flat_gain: f64 = 1.25;
    let flat = GainLine::new(
        2.0 * PI * SPEED_OF_LIGHT * flat_gain.ln() / (omega0 * 0.025),
        1e15,
        omega0,
        0.025,
    )?;
    out.push(Check {
        name: "flat_line_closed_form_snu",
        value: difference_noise_spectrum(&source, &flat, 0.0, 1e6, 0.95, 0.2)?,
        expected: difference_noise_after_channel(g1, flat_gain, 0.95, 0.2)?,
        tolerance: 1e-6,
    });

    let (n, rate) = (1usize << 16, 2.5e9);
    let (noise, _) = shot_reference(1e4, 1e4, n, rate, derive_seed(seed, &[0]))?;
    let noise = band_filter(&noise, 1e6, 100e6)?;
    let tau = 12e-9;
    let delay: Vec<Complex64> = fft::bin_frequencies(n, rate)
        .iter()
        .map(|&f| Complex64::from_polar(1.0, -2.0 * PI * f * tau))
        .collect();
    let delayed = apply_transfer(&noise, &delay)?;
    let c = cross_correlation(&noise, &delayed, 100e-9)?;
    out.push(Check {
        name: "injected_delay_ns",
        value: c.peak()? * 1e9,
        expected: 12.0,
        tolerance: 0.2,
    });

    let grid = FrequencyGrid::for_trace(n, rate)?;
    let targets = build_targets(&source, &grid)?;
    let (mp, mc) = source.means();
    let welch = WelchConfig {
        segment_len: 1 << 12,
        ..WelchConfig::default()
    };
    let traces = 16;
    let mut diff = Vec::new();
    let mut shot = Vec::new();
    for t in 0..traces {
        let (p, c) = synth_twin_traces(&targets, n, rate, mp, mc, derive_seed(seed, &[1, t]))?;
        diff.push(psd(&p.difference(&c)?, &welch)?);
        let (rp, rc) = shot_reference(mp, mc, n, rate, derive_seed(seed, &[2, t]))?;
        shot.push(psd(&rp.difference(&rc)?, &welch)?);
    }
    let db = snu_normalize(
        &crate::analysis::average(&diff)?,
        &crate::analysis::average(&shot)?,
    )?;
    out.push(Check {
        name: "synthesized_band_squeezing_db",
        value: crate::analysis::band_squeezing_db(&db, 1e6, 10e6)?,
        expected: -2.5,
        tolerance: 0.3,
    });
    Ok(out)
}

pub(super) fn run(
    config: &ScenarioConfig,
    summary: &mut Map<String, Value>,
) -> Result<Vec<OutputFile>> {
    let checks = checks(config.seed)?;
    let mut text = String::from("check,value,expected,tolerance,passed\n");
    let mut failed = Vec::new();
    for c in &checks {
        text.push_str(&format!(
            "{},{:e},{:e},{:e},{}\n",
            c.name,
            c.value,
            c.expected,
            c.tolerance,
            c.passed()
        ));
        if !c.passed() {
            failed.push(c.name);
        }
    }
    summary.insert("checks".into(), json!(checks.len()));
    summary.insert("failed_checks".into(), json!(failed));
    if !failed.is_empty() {
        return Err(Error::SelfTest(failed.join(", ")));
    }
    Ok(vec![OutputFile {
        name: "selftest.csv".into(),
        contents: text.into_bytes(),
    }])
}
