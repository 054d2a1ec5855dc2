use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::fft;
use crate::sim::Trace;

/// Default Welch segment length.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    /// Periodic Hann window.
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..len)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
                .collect(),
            Window::Rectangular => vec![1.0; len],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap: f64,
    pub window: Window,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segment_len: DEFAULT_SEGMENT_LEN,
            overlap: 0.5,
            window: Window::Hann,
        }
    }
}

impl WelchConfig {
    pub fn validate(&self, trace_len: usize) -> Result<()> {
        ensure(
            self.segment_len >= 2 && self.segment_len.is_power_of_two(),
            "segment_len",
            || format!("must be a power of two >= 2, got {}", self.segment_len),
        )?;
        ensure(self.segment_len <= trace_len, "segment_len", || {
            format!("{} exceeds trace length {trace_len}", self.segment_len)
        })?;
        ensure((0.0..1.0).contains(&self.overlap), "overlap", || {
            format!("must lie in [0, 1), got {}", self.overlap)
        })
    }

    fn step(&self) -> usize {
        ((self.segment_len as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Photons² per sample² per Hz.
    Absolute,
    /// Linear shot-noise units.
    Snu,
    /// Decibels relative to shot noise.
    DbReShotNoise,
}

/// Welch estimator settings and how many traces were averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorMeta {
    pub config: WelchConfig,
    pub sample_rate: f64,
    pub segments_per_trace: usize,
    pub traces: usize,
}

/// One-sided power spectral density on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    pub meta: EstimatorMeta,
}

/// Welch estimate with one-sided density scaling, so that integrating the
/// result over frequency returns the trace variance.
pub fn psd(trace: &Trace, config: &WelchConfig) -> Result<Spectrum> {
    config.validate(trace.len())?;
    let len = config.segment_len;
    let window = config.window.coefficients(len);
    let power: f64 = window.iter().map(|w| w * w).sum();
    let rate = trace.sample_rate();
    let step = config.step();
    let samples = trace.samples();

    let bins = len / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut segments = 0;
    let mut start = 0;
    let mut buffer = vec![0.0; len];
    while start + len <= samples.len() {
        for (b, (x, w)) in buffer
            .iter_mut()
            .zip(samples[start..start + len].iter().zip(&window))
        {
            *b = x * w;
        }
        for (a, x) in acc.iter_mut().zip(fft::forward(&buffer)) {
            *a += x.norm_sqr();
        }
        segments += 1;
        start += step;
    }

    let scale = 1.0 / (rate * power * segments as f64);
    let values = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || k == bins - 1 { 1.0 } else { 2.0 };
            one_sided * a * scale
        })
        .collect();
    Ok(Spectrum {
        frequencies: fft::bin_frequencies(len, rate),
        values,
        normalization: Normalization::Absolute,
        meta: EstimatorMeta {
            config: *config,
            sample_rate: rate,
            segments_per_trace: segments,
            traces: 1,
        },
    })
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        self.meta.sample_rate / self.meta.config.segment_len as f64
    }

    /// `∫ PSD df` by the rectangle rule on the bin grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width()
    }

    pub fn check_compatible(&self, other: &Spectrum) -> Result<()> {
        if self.frequencies != other.frequencies {
            return Err(Error::IncompatibleSpectra("frequency grids differ".into()));
        }
        if self.meta.config != other.meta.config || self.meta.sample_rate != other.meta.sample_rate
        {
            return Err(Error::IncompatibleSpectra(
                "estimator settings differ".into(),
            ));
        }
        if self.normalization != other.normalization {
            return Err(Error::IncompatibleSpectra(format!(
                "normalizations differ: {:?} vs {:?}",
                self.normalization, other.normalization
            )));
        }
        Ok(())
    }

    /// Divide by the shot-noise level of a beam with `mean_flux` photons per
    /// sample, `2·N̄/f_s`, giving linear SNU.
    pub fn to_snu(&self, mean_flux: f64) -> Result<Spectrum> {
        if self.normalization != Normalization::Absolute {
            return Err(Error::IncompatibleSpectra(
                "expected an absolute spectrum".into(),
            ));
        }
        let shot = 2.0 * mean_flux / self.meta.sample_rate;
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v /= shot);
        out.normalization = Normalization::Snu;
        Ok(out)
    }

    /// Linear values, undoing a dB normalization if present.
    pub fn linear_values(&self) -> Vec<f64> {
        match self.normalization {
            Normalization::DbReShotNoise => {
                self.values.iter().map(|v| 10f64.powf(v / 10.0)).collect()
            }
            _ => self.values.clone(),
        }
    }

    /// Indices of bins with `f_lo ≤ f ≤ f_hi`.
    pub fn band_indices(&self, f_lo: f64, f_hi: f64) -> std::ops::Range<usize> {
        let lo = self.frequencies.partition_point(|&f| f < f_lo);
        let hi = self.frequencies.partition_point(|&f| f <= f_hi);
        lo..hi.max(lo)
    }

    /// CSV with `frequency_hz` and a value column named by the normalization.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let unit = match self.normalization {
            Normalization::Absolute => "psd_per_hz",
            Normalization::Snu => "psd_snu",
            Normalization::DbReShotNoise => "psd_db_re_shot_noise",
        };
        writeln!(out, "frequency_hz,{unit}")?;
        for (f, v) in self.frequencies.iter().zip(&self.values) {
            writeln!(out, "{f:e},{v:e}")?;
        }
        Ok(())
    }
}

/// Running mean of Welch spectra from many traces.
#[derive(Debug, Clone, Default)]
pub struct PsdAccumulator {
    sum: Option<Spectrum>,
}

impl PsdAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, spectrum: Spectrum) -> Result<()> {
        let weight = spectrum.meta.traces as f64;
        match &mut self.sum {
            None => {
                let mut first = spectrum;
                first.values.iter_mut().for_each(|v| *v *= weight);
                self.sum = Some(first);
            }
            Some(sum) => {
                sum.check_compatible(&spectrum)?;
                for (a, b) in sum.values.iter_mut().zip(&spectrum.values) {
                    *a += b * weight;
                }
                sum.meta.traces += spectrum.meta.traces;
            }
        }
        Ok(())
    }

    pub fn traces(&self) -> usize {
        self.sum.as_ref().map_or(0, |s| s.meta.traces)
    }

    /// The trace-weighted mean spectrum, or `None` if nothing was added.
    pub fn mean(&self) -> Option<Spectrum> {
        let mut out = self.sum.clone()?;
        let n = out.meta.traces as f64;
        out.values.iter_mut().for_each(|v| *v /= n);
        Some(out)
    }
}

/// Mean of a set of compatible spectra, weighted by trace count.
pub fn average(spectra: &[Spectrum]) -> Result<Spectrum> {
    ensure(!spectra.is_empty(), "spectra", || {
        "nothing to average".into()
    })?;
    let first = &spectra[0];
    let mut values = vec![0.0; first.len()];
    let mut traces = 0;
    for s in spectra {
        first.check_compatible(s)?;
        let w = s.meta.traces as f64;
        for (a, b) in values.iter_mut().zip(&s.values) {
            *a += w * b;
        }
        traces += s.meta.traces;
    }
    values.iter_mut().for_each(|v| *v /= traces as f64);
    let mut out = first.clone();
    out.values = values;
    out.meta.traces = traces;
    Ok(out)
}

/// Pointwise `10·log10(spec/reference)`.
pub fn snu_normalize(spec: &Spectrum, reference: &Spectrum) -> Result<Spectrum> {
    spec.check_compatible(reference)?;
    if spec.normalization == Normalization::DbReShotNoise {
        return Err(Error::IncompatibleSpectra(
            "spectrum is already in dB".into(),
        ));
    }
    let values = spec
        .values
        .iter()
        .zip(&reference.values)
        .map(|(s, r)| 10.0 * (s / r).log10())
        .collect();
    Ok(Spectrum {
        frequencies: spec.frequencies.clone(),
        values,
        normalization: Normalization::DbReShotNoise,
        meta: spec.meta,
    })
}

/// `10·log10` of the linear mean over bins in `[f_lo, f_hi]`.
pub fn band_squeezing_db(spec: &Spectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    ensure(f_lo <= f_hi, "band", || {
        format!("f_lo {f_lo} exceeds f_hi {f_hi}")
    })?;
    let range = spec.band_indices(f_lo, f_hi);
    ensure(!range.is_empty(), "band", || {
        format!("no bins between {f_lo} Hz and {f_hi} Hz")
    })?;
    let linear = spec.linear_values();
    let mean = linear[range.clone()].iter().sum::<f64>() / range.len() as f64;
    Ok(10.0 * mean.log10())
}
