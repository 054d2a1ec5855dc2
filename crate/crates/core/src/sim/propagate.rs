use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::trace::Trace;
use crate::channel::{check_eta, excess_snu};
use crate::dispersion::GainLine;
use crate::error::{ensure, Error, Result};
use crate::{fft, seeds};

/// Multiply the fluctuation spectrum of `trace` by `transfer`, given on the
/// one-sided bin grid in forward-transform convention. The mean flux is
/// unchanged.
pub fn apply_transfer(trace: &Trace, transfer: &[Complex64]) -> Result<Trace> {
    let n = trace.len();
    if transfer.len() != n / 2 + 1 {
        return Err(Error::invalid(
            "transfer",
            format!("expected {} bins, got {}", n / 2 + 1, transfer.len()),
        ));
    }
    let mut spectrum = fft::forward(trace.samples());
    for (x, h) in spectrum.iter_mut().zip(transfer) {
        *x *= h;
    }
    Ok(trace.derived(
        fft::inverse(spectrum, n),
        trace.mean_flux(),
        None,
        "transfer".into(),
    ))
}

/// Pass `trace` through the gain line with its carrier at `carrier_offset`
/// (rad/s from line center).
///
/// Sidebands are multiplied by `G·M(f)`, the mean flux by `G`, and
/// independent Gaussian noise is added with output-SNU density
/// `(Ḡ(f) − 1)·Ḡ(f)/G` plus the flat excess `10^(excess_db/10) − 1`.
/// A vacuum line with no excess returns the input unchanged.
pub fn propagate_channel(
    trace: &Trace,
    line: &GainLine,
    carrier_offset: f64,
    excess_db: f64,
    seed: u64,
) -> Result<Trace> {
    line.validate()?;
    ensure(carrier_offset.is_finite(), "carrier_offset", || {
        "must be finite".into()
    })?;
    ensure(
        excess_db.is_finite() && excess_db >= 0.0,
        "excess_db",
        || format!("must be >= 0, got {excess_db}"),
    )?;
    if line.g == 0.0 && excess_db == 0.0 {
        let mut out = trace.clone();
        out.seed_tag.lineage.push("channel:vacuum".into());
        return Ok(out);
    }

    let n = trace.len();
    let gain = line.intensity_gain(carrier_offset);
    let mean_out = gain * trace.mean_flux();
    let excess = excess_snu(excess_db);
    let freqs = fft::bin_frequencies(n, trace.sample_rate());
    let mut rng = seeds::rng(seed);
    let mut spectrum = fft::forward(trace.samples());
    let last = spectrum.len() - 1;
    for (k, x) in spectrum.iter_mut().enumerate() {
        let f = freqs[k];
        let g_bar = line.sideband_mean_gain(carrier_offset, f);
        let added_snu = (g_bar - 1.0) * g_bar / gain + excess;
        let sigma = (n as f64 * mean_out * added_snu.max(0.0)).sqrt();
        let noise = if k == 0 || k == last {
            Complex64::new(sigma * normal(&mut rng), 0.0)
        } else {
            Complex64::new(normal(&mut rng), normal(&mut rng))
                * (sigma * std::f64::consts::FRAC_1_SQRT_2)
        };
        *x = *x * (gain * line.modulation_transfer_at(carrier_offset, f)) + noise;
    }
    Ok(trace.derived(
        fft::inverse(spectrum, n),
        mean_out,
        Some(seed),
        format!("channel(offset={carrier_offset:e},excess_db={excess_db})"),
    ))
}

/// Detection with quantum efficiency `eta` modeled as a beam splitter: the
/// signal is scaled by `eta` and white vacuum noise of variance
/// `eta(1−eta)N̄` is added, so the SNU level maps as `eta·s + 1 − eta`.
pub fn apply_detection(trace: &Trace, eta: f64, seed: u64) -> Result<Trace> {
    check_eta(eta)?;
    let step = format!("detect(eta={eta})");
    if eta == 1.0 {
        let mut out = trace.clone();
        out.seed_tag.lineage.push(step);
        return Ok(out);
    }
    let sigma = (eta * (1.0 - eta) * trace.mean_flux()).sqrt();
    let mut rng = seeds::rng(seed);
    let samples = trace
        .samples()
        .iter()
        .map(|x| eta * x + sigma * normal(&mut rng))
        .collect();
    Ok(trace.derived(samples, eta * trace.mean_flux(), Some(seed), step))
}

/// Add white noise of `floor_snu` shot-noise units, an electronic noise floor.
pub fn add_white_floor(trace: &Trace, floor_snu: f64, seed: u64) -> Result<Trace> {
    ensure(
        floor_snu.is_finite() && floor_snu >= 0.0,
        "floor_snu",
        || format!("must be >= 0, got {floor_snu}"),
    )?;
    let sigma = (floor_snu * trace.mean_flux()).sqrt();
    let mut rng = seeds::rng(seed);
    let samples = trace
        .samples()
        .iter()
        .map(|x| x + sigma * normal(&mut rng))
        .collect();
    Ok(trace.derived(
        samples,
        trace.mean_flux(),
        Some(seed),
        format!("floor({floor_snu})"),
    ))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}
