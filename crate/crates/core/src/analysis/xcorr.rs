//! Normalized intensity cross-correlation and peak-delay extraction.
//!
//! `C₁₂(m) = Σ_t i₁(t)·i₂(t+m)` is computed circularly from the spectra as
//! `IFFT(conj(X₁)·X₂)` and reported as `C₁₂/√(C₁₁(0)·C₂₂(0))`. A positive
//! peak lag means `i₂` lags `i₁`.

use std::sync::Arc;

use num_complex::Complex64;

use super::filter::BandFilter;
use crate::error::{ensure, Error, Result};
use crate::fft;
use crate::sim::Trace;

/// Values within this distance of the maximum count as ties.
pub const PEAK_TIE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct XcorrResult {
    /// Lag grid in seconds, spaced by the sample period.
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    /// Sub-sample peak position, `None` when the maximum is not unique.
    pub peak_lag: Option<f64>,
    /// Full width at half of the peak value, `None` if a half-maximum
    /// crossing lies outside the lag window or the peak is degenerate.
    pub fwhm: Option<f64>,
}

impl XcorrResult {
    fn from_raw(raw: &[f64], norm: f64, max_lag_samples: usize, sample_rate: f64) -> Self {
        let m = max_lag_samples as isize;
        let dt = 1.0 / sample_rate;
        let lags = (-m..=m).map(|k| k as f64 * dt).collect();
        let values: Vec<f64> = if norm > 0.0 {
            raw.iter().map(|v| v / norm).collect()
        } else {
            vec![0.0; raw.len()]
        };
        let peak = locate_peak(&values);
        let peak_lag = peak.map(|(j, p, _)| (j as f64 - m as f64 + p) * dt);
        let fwhm = peak.and_then(|(j, _, height)| half_width(&values, j, height).map(|w| w * dt));
        XcorrResult {
            lags,
            values,
            peak_lag,
            fwhm,
        }
    }

    pub fn sample_period(&self) -> f64 {
        if self.lags.len() > 1 {
            self.lags[1] - self.lags[0]
        } else {
            0.0
        }
    }

    pub fn peak_value(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The refined peak lag, or a degenerate-peak error.
    pub fn peak(&self) -> Result<f64> {
        self.peak_lag
            .ok_or_else(|| Error::DegeneratePeak("no unique maximum in the lag window".into()))
    }
}

/// Discrete maximum `j`, parabolic offset `p ∈ [−½, ½]`, and interpolated
/// peak height, or `None` when the maximum is not unique.
fn locate_peak(values: &[f64]) -> Option<(usize, f64, f64)> {
    let (j, &top) = values
        .iter()
        .enumerate()
        .fold(
            (0, &f64::NEG_INFINITY),
            |best, v| if v.1 > best.1 { v } else { best },
        );
    let bottom = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = top - bottom;
    if span.is_nan() || span <= PEAK_TIE_TOLERANCE {
        return None;
    }
    // the main lobe is the monotone run on either side of the maximum
    let mut lo = j;
    while lo > 0 && values[lo - 1] <= values[lo] {
        lo -= 1;
    }
    let mut hi = j;
    while hi + 1 < values.len() && values[hi + 1] <= values[hi] {
        hi += 1;
    }
    let tied = values
        .iter()
        .enumerate()
        .any(|(i, &v)| (i < lo || i > hi) && v >= top - PEAK_TIE_TOLERANCE);
    if tied {
        return None;
    }
    if j == 0 || j + 1 == values.len() {
        return Some((j, 0.0, top));
    }
    let (ym, y0, yp) = (values[j - 1], values[j], values[j + 1]);
    let curvature = ym - 2.0 * y0 + yp;
    if curvature >= 0.0 {
        return Some((j, 0.0, top));
    }
    let p = (0.5 * (ym - yp) / curvature).clamp(-0.5, 0.5);
    Some((j, p, y0 - 0.25 * (ym - yp) * p))
}

/// Width in samples between the linearly interpolated half-height crossings
/// either side of `j`.
fn half_width(values: &[f64], j: usize, height: f64) -> Option<f64> {
    if height <= 0.0 {
        return None;
    }
    let half = height / 2.0;
    let mut l = j;
    while values[l] >= half {
        if l == 0 {
            return None;
        }
        l -= 1;
    }
    let left = l as f64 + (half - values[l]) / (values[l + 1] - values[l]);
    let mut r = j;
    while values[r] >= half {
        r += 1;
        if r == values.len() {
            return None;
        }
    }
    let right = r as f64 - (half - values[r]) / (values[r - 1] - values[r]);
    Some(right - left)
}

fn lag_samples(n: usize, sample_rate: f64, max_lag: f64) -> Result<usize> {
    ensure(max_lag.is_finite() && max_lag >= 0.0, "max_lag", || {
        format!("must be >= 0, got {max_lag}")
    })?;
    let m = (max_lag * sample_rate).round() as usize;
    ensure(m < n / 2, "max_lag", || {
        format!("{max_lag} s spans {m} samples, which is not below half the trace length {n}")
    })?;
    Ok(m)
}

/// Normalized circular cross-correlation of two traces over `±max_lag`.
pub fn cross_correlation(i1: &Trace, i2: &Trace, max_lag: f64) -> Result<XcorrResult> {
    i1.check_compatible(i2)?;
    let mut acc = XcorrAccumulator::new(i1.len(), i1.sample_rate(), max_lag, None)?;
    acc.add(i1, i2)?;
    Ok(acc.result())
}

/// Sums raw correlations over many trace pairs, optionally band-filtering
/// both members with the same [`BandFilter`] in the frequency domain.
#[derive(Debug, Clone)]
pub struct XcorrAccumulator {
    n: usize,
    sample_rate: f64,
    max_lag_samples: usize,
    weight: Option<Arc<Vec<f64>>>,
    c12: Vec<f64>,
    c11: f64,
    c22: f64,
    pairs: usize,
}

impl XcorrAccumulator {
    pub fn new(n: usize, sample_rate: f64, max_lag: f64, band: Option<BandFilter>) -> Result<Self> {
        ensure(n >= 2 && n.is_power_of_two(), "n", || {
            format!("must be a power of two >= 2, got {n}")
        })?;
        let m = lag_samples(n, sample_rate, max_lag)?;
        Ok(XcorrAccumulator {
            n,
            sample_rate,
            max_lag_samples: m,
            weight: band.map(|b| Arc::new(b.transfer(n, sample_rate))),
            c12: vec![0.0; 2 * m + 1],
            c11: 0.0,
            c22: 0.0,
            pairs: 0,
        })
    }

    /// A zeroed accumulator sharing this one's settings and filter.
    pub fn empty_like(&self) -> Self {
        XcorrAccumulator {
            c12: vec![0.0; self.c12.len()],
            c11: 0.0,
            c22: 0.0,
            pairs: 0,
            weight: self.weight.clone(),
            ..*self
        }
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn add(&mut self, i1: &Trace, i2: &Trace) -> Result<()> {
        i1.check_compatible(i2)?;
        if i1.len() != self.n || i1.sample_rate() != self.sample_rate {
            return Err(Error::IncompatibleTraces(format!(
                "accumulator expects {} samples at {} Hz",
                self.n, self.sample_rate
            )));
        }
        self.add_spectra(&fft::forward(i1.samples()), &fft::forward(i2.samples()))
    }

    /// Add a pair given by their unnormalized one-sided forward transforms.
    pub fn add_spectra(&mut self, x1: &[Complex64], x2: &[Complex64]) -> Result<()> {
        let bins = self.n / 2 + 1;
        if x1.len() != bins || x2.len() != bins {
            return Err(Error::IncompatibleTraces(format!(
                "expected {bins} spectral bins"
            )));
        }
        let mut product = Vec::with_capacity(bins);
        let (mut e1, mut e2) = (Vec::with_capacity(bins), Vec::with_capacity(bins));
        for k in 0..bins {
            let h = self.weight.as_ref().map_or(1.0, |w| w[k]);
            let (a, b) = (x1[k] * h, x2[k] * h);
            product.push(a.conj() * b);
            e1.push(a);
            e2.push(b);
        }
        self.c11 += fft::energy(&e1, self.n);
        self.c22 += fft::energy(&e2, self.n);
        let circ = fft::inverse(product, self.n);
        let m = self.max_lag_samples;
        for (i, c) in self.c12.iter_mut().enumerate() {
            let lag = i as isize - m as isize;
            *c += circ[lag.rem_euclid(self.n as isize) as usize];
        }
        self.pairs += 1;
        Ok(())
    }

    /// Fold another accumulator with the same settings into this one.
    pub fn merge(&mut self, other: &XcorrAccumulator) -> Result<()> {
        if self.n != other.n
            || self.sample_rate != other.sample_rate
            || self.max_lag_samples != other.max_lag_samples
            || !same_weight(&self.weight, &other.weight)
        {
            return Err(Error::IncompatibleTraces(
                "accumulator settings differ".into(),
            ));
        }
        for (a, b) in self.c12.iter_mut().zip(&other.c12) {
            *a += b;
        }
        self.c11 += other.c11;
        self.c22 += other.c22;
        self.pairs += other.pairs;
        Ok(())
    }

    pub fn result(&self) -> XcorrResult {
        XcorrResult::from_raw(
            &self.c12,
            (self.c11 * self.c22).sqrt(),
            self.max_lag_samples,
            self.sample_rate,
        )
    }
}

fn same_weight(a: &Option<Arc<Vec<f64>>>, b: &Option<Arc<Vec<f64>>>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
        _ => false,
    }
}

/// `argmax(c_fast) − argmax(c_ref)`; negative values are an advance.
pub fn peak_delay(c_fast: &XcorrResult, c_ref: &XcorrResult) -> Result<f64> {
    if c_fast.lags != c_ref.lags {
        return Err(Error::IncompatibleTraces(
            "correlation lag grids differ".into(),
        ));
    }
    Ok(c_fast.peak()? - c_ref.peak()?)
}
