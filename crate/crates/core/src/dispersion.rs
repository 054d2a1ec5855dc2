//! Lorentzian gain-line dispersion.
//!
//! The medium is a single phenomenological gain line with complex refractive
//! index
//!
//! ```text
//! n(δ) = 1 + (g / 4π) · γ / (δ + iγ)
//! ```
//!
//! where `δ` is the offset of an optical component from line center. With
//! `e^{i(nωz/c − ωt)}` propagation, `Im n ≤ 0` is gain. A component at offset
//! `δ` has optical frequency `ω(δ) = ω0 + δ`; using the true frequency in the
//! propagation phase makes the phase slope of the field transfer equal the
//! group delay `(L/c)(n_g − 1)` exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wavelength of the rubidium D1 line used by the presets, m.
pub const D1_WAVELENGTH: f64 = 795e-9;

/// Angular optical frequency for a vacuum wavelength.
pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength
}

/// Parameters of a Lorentzian gain line plus the propagation length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainLine {
    /// Dimensionless gain coefficient.
    pub g: f64,
    /// Half width at half maximum, rad/s.
    pub gamma: f64,
    /// Line-center angular optical frequency, rad/s.
    pub omega0: f64,
    /// Propagation length, m.
    pub length: f64,
}

impl GainLine {
    pub fn new(g: f64, gamma: f64, omega0: f64, length: f64) -> Result<Self> {
        let line = GainLine {
            g,
            gamma,
            omega0,
            length,
        };
        line.validate()?;
        Ok(line)
    }

    /// A line with no gain: every transfer is the identity.
    pub fn vacuum(length: f64) -> Self {
        GainLine {
            g: 0.0,
            gamma: 2.0 * PI * 1e6,
            omega0: angular_frequency(D1_WAVELENGTH),
            length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.g.is_finite() && self.g >= 0.0, "g", || {
            format!("must be finite and >= 0, got {}", self.g)
        })?;
        ensure(self.gamma.is_finite() && self.gamma > 0.0, "gamma", || {
            format!("must be finite and > 0, got {}", self.gamma)
        })?;
        ensure(
            self.omega0.is_finite() && self.omega0 > 0.0,
            "omega0",
            || format!("must be finite and > 0, got {}", self.omega0),
        )?;
        ensure(
            self.length.is_finite() && self.length > 0.0,
            "length",
            || format!("must be finite and > 0, got {}", self.length),
        )
    }

    /// Full width at half maximum of the dB gain profile, Hz.
    pub fn fwhm_hz(&self) -> f64 {
        self.gamma / PI
    }

    /// Optical angular frequency of a component at offset `delta` from line center.
    pub fn optical_frequency(&self, delta: f64) -> f64 {
        self.omega0 + delta
    }

    /// `n(δ) − 1`, computed without forming `n` first.
    pub fn index_excess(&self, delta: f64) -> Complex64 {
        let strength = self.g / (4.0 * PI) * self.gamma;
        Complex64::new(strength, 0.0) / Complex64::new(delta, self.gamma)
    }

    pub fn refractive_index(&self, delta: f64) -> Complex64 {
        1.0 + self.index_excess(delta)
    }

    /// Closed-form `dn/dω = −(g/4π) γ / (δ + iγ)²`.
    pub fn dn_domega(&self, delta: f64) -> Complex64 {
        let z = Complex64::new(delta, self.gamma);
        -(self.g / (4.0 * PI) * self.gamma) / (z * z)
    }

    /// `n_g − 1 = Re(n − 1) + ω Re(dn/dω)`.
    pub fn group_index_excess(&self, delta: f64) -> f64 {
        self.index_excess(delta).re + self.optical_frequency(delta) * self.dn_domega(delta).re
    }

    /// Group index `n_g = n + ω dn/dω` (real part).
    pub fn group_index(&self, delta: f64) -> f64 {
        1.0 + self.group_index_excess(delta)
    }

    /// Complex propagation exponent `i (n − 1) ω L / c`. The field transfer
    /// relative to vacuum is `exp` of this; its real part is the log field gain.
    pub fn propagation_exponent(&self, delta: f64) -> Complex64 {
        let scale = self.optical_frequency(delta) * self.length / SPEED_OF_LIGHT;
        Complex64::i() * self.index_excess(delta) * scale
    }

    /// Field transfer `H(δ) = exp[i (n(δ) − 1) ω L / c]`.
    pub fn field_transfer(&self, delta: f64) -> Complex64 {
        self.propagation_exponent(delta).exp()
    }

    /// Linear power gain `exp(−2 Im(n) ω L / c)`.
    pub fn intensity_gain(&self, delta: f64) -> f64 {
        (2.0 * self.propagation_exponent(delta).re).exp()
    }

    pub fn intensity_gain_db(&self, delta: f64) -> f64 {
        // 10 log10(exp(x)) without the round trip through exp
        10.0 * std::f64::consts::LOG10_E * 2.0 * self.propagation_exponent(delta).re
    }

    /// Peak delay `ΔT = (L/c)(n_g − 1)`; negative values are advancement.
    pub fn peak_advance(&self, delta: f64) -> f64 {
        self.length / SPEED_OF_LIGHT * self.group_index_excess(delta)
    }

    /// Mean of the power gains seen by the two intensity sidebands at `±f`
    /// around a carrier at `offset`.
    pub fn sideband_mean_gain(&self, offset: f64, f: f64) -> f64 {
        let omega = 2.0 * PI * f;
        0.5 * (self.intensity_gain(offset + omega) + self.intensity_gain(offset - omega))
    }

    /// Relative intensity-modulation transfer at sideband frequency `f` (Hz)
    /// for a carrier at `offset` (rad/s from line center).
    ///
    /// Returned in the convention of a forward transform `X(f) = Σ x e^{−2πift}`,
    /// so a pure group delay `τ` appears as `e^{−2πifτ}`:
    ///
    /// ```text
    /// M(f) = [H*(Δ+Ω) H(Δ) + H*(Δ) H(Δ−Ω)] / (2 |H(Δ)|²),   Ω = 2πf
    /// ```
    ///
    /// `M(0) = 1` and `M(−f) = conj(M(f))` hold exactly.
    pub fn modulation_transfer_at(&self, offset: f64, f: f64) -> Complex64 {
        if f == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let omega = 2.0 * PI * f;
        let center = self.propagation_exponent(offset);
        let upper = (self.propagation_exponent(offset + omega) - center).conj();
        let lower = self.propagation_exponent(offset - omega) - center;
        0.5 * (upper.exp() + lower.exp())
    }

    /// [`modulation_transfer_at`](Self::modulation_transfer_at) over a frequency grid.
    pub fn modulation_transfer(&self, offset: f64, freqs: &[f64]) -> Vec<Complex64> {
        freqs
            .iter()
            .map(|&f| self.modulation_transfer_at(offset, f))
            .collect()
    }

    /// Group delay of the intensity modulation, `−(1/2π) d arg M/df` at
    /// `f → 0`, from the phase of [`modulation_transfer_at`](Self::modulation_transfer_at).
    ///
    /// The phase is odd in `f`, so the `f³` term is removed by Richardson
    /// extrapolation of the secant slopes at 100 Hz and 200 Hz.
    pub fn transfer_group_delay(&self, offset: f64) -> f64 {
        let secant = |f: f64| -self.modulation_transfer_at(offset, f).arg() / (2.0 * PI * f);
        let h = 100.0;
        (4.0 * secant(h) - secant(2.0 * h)) / 3.0
    }

    /// Evaluate the medium on a grid of offsets from line center.
    pub fn response(&self, detuning_grid: &[f64]) -> MediumResponse {
        MediumResponse {
            detuning_grid: detuning_grid.to_vec(),
            n_complex: detuning_grid
                .iter()
                .map(|&d| self.refractive_index(d))
                .collect(),
            gain: detuning_grid
                .iter()
                .map(|&d| self.intensity_gain(d))
                .collect(),
            group_index: detuning_grid.iter().map(|&d| self.group_index(d)).collect(),
        }
    }
}

/// Medium quantities sampled on a detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumResponse {
    pub detuning_grid: Vec<f64>,
    pub n_complex: Vec<Complex64>,
    pub gain: Vec<f64>,
    pub group_index: Vec<f64>,
}

/// Build a line whose dB gain profile peaks at `peak_gain_db` with full width
/// `fwhm_hz` at half maximum.
pub fn calibrate(
    peak_gain_db: f64,
    fwhm_hz: f64,
    length: f64,
    omega_carrier: f64,
) -> Result<GainLine> {
    ensure(
        peak_gain_db.is_finite() && peak_gain_db >= 0.0,
        "peak_gain_db",
        || format!("must be finite and >= 0, got {peak_gain_db}"),
    )?;
    ensure(fwhm_hz.is_finite() && fwhm_hz > 0.0, "fwhm", || {
        format!("must be finite and > 0, got {fwhm_hz}")
    })?;
    ensure(length.is_finite() && length > 0.0, "length", || {
        format!("must be finite and > 0, got {length}")
    })?;
    let gamma = PI * fwhm_hz;
    // at δ = 0: ln G = 2 (g/4π) ω0 L / c
    let ln_gain = peak_gain_db / (10.0 * std::f64::consts::LOG10_E);
    let g = 2.0 * PI * SPEED_OF_LIGHT * ln_gain / (omega_carrier * length);
    GainLine::new(g, gamma, omega_carrier, length)
}

/// Build a line that, at carrier offset `x_op · γ`, has power gain
/// `gain_at_operating` and peak delay `advance` (negative for advancement).
///
/// Uses the dispersive closed forms `ln G = 2κ/(1+x²)` and
/// `ΔT = −(κ/γ)(x²−1)/(x²+1)²` with `κ = g ω0 L / (4π c)`, which requires
/// `x_op > 1` for an advance.
pub fn line_for_advance(
    advance: f64,
    gain_at_operating: f64,
    x_op: f64,
    length: f64,
    omega_carrier: f64,
) -> Result<GainLine> {
    ensure(advance.is_finite() && advance < 0.0, "advance", || {
        format!("must be a negative (advancing) delay, got {advance}")
    })?;
    ensure(
        gain_at_operating.is_finite() && gain_at_operating > 1.0,
        "gain_at_operating",
        || format!("must be > 1, got {gain_at_operating}"),
    )?;
    ensure(x_op.is_finite() && x_op > 1.0, "x_op", || {
        format!("operating offset must lie outside the half width (> 1), got {x_op}")
    })?;
    let x2 = x_op * x_op;
    let half_ln_gain = gain_at_operating.ln() / 2.0;
    let kappa = half_ln_gain * (1.0 + x2);
    let gamma = half_ln_gain * (x2 - 1.0) / ((x2 + 1.0) * advance.abs());
    // κ is defined at the optical frequency of the operating carrier
    let omega_op = omega_carrier + x_op * gamma;
    let g = 4.0 * PI * SPEED_OF_LIGHT * kappa / (omega_op * length);
    GainLine::new(g, gamma, omega_carrier, length)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calibrated() -> GainLine {
        calibrate(7.5, 10e6, 0.025, angular_frequency(D1_WAVELENGTH)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn index_on_resonance() {
        let line = calibrated();
        let n = line.refractive_index(0.0);
        assert_eq!(n.re, 1.0);
        assert!(rel(n.im, -line.g / (4.0 * PI)) < 1e-14);
    }

    #[test]
    fn index_far_detuned() {
        let line = calibrated();
        for sign in [-1.0, 1.0] {
            let n = line.refractive_index(sign * 1e6 * line.gamma);
            assert!((n - 1.0).norm() < 1e-5 * line.g);
        }
    }

    #[test]
    fn index_at_half_width() {
        let line = calibrated();
        let expected = Complex64::new(1.0, 0.0) + line.g / (8.0 * PI) * Complex64::new(1.0, -1.0);
        let n = line.refractive_index(line.gamma);
        assert!((n - expected).norm() < 1e-18);
    }

    #[test]
    fn group_index_line_center_is_slow() {
        let line = calibrated();
        let expected = line.omega0 * line.g / (4.0 * PI * line.gamma);
        let excess = line.group_index_excess(0.0);
        assert!(excess > 0.0);
        assert!(rel(excess, expected) < 1e-12);
    }

    #[test]
    fn group_index_dispersive_term_vanishes_at_half_width() {
        let line = calibrated();
        for d in [line.gamma, -line.gamma] {
            assert!(line.dn_domega(d).re.abs() < 1e-30);
            assert!((line.group_index(d) - line.refractive_index(d).re).abs() < 1e-12);
        }
    }

    #[test]
    fn group_index_wing_minimum() {
        let line = calibrated();
        let d = 3f64.sqrt() * line.gamma;
        let omega = line.optical_frequency(d);
        let expected = -omega * line.g / (32.0 * PI * line.gamma) + line.refractive_index(d).re;
        assert!(rel(line.group_index(d), expected) < 1e-9);

        // dense grid search of the dispersive term on the positive wing
        let (mut best_x, mut best) = (0.0, f64::INFINITY);
        for i in 0..=400_000 {
            let x = 1.0 + i as f64 * 1e-5;
            let v = line.dn_domega(x * line.gamma).re;
            if v < best {
                best = v;
                best_x = x;
            }
        }
        assert!((best_x - 3f64.sqrt()).abs() < 2e-5, "{best_x}");
    }

    #[test]
    fn calibrated_peak_gain() {
        let line = calibrated();
        assert!((line.intensity_gain(0.0) - 10f64.powf(0.75)).abs() < 1e-9);
        assert!((line.intensity_gain(0.0) - 5.623).abs() < 5e-4);
        assert!((line.intensity_gain_db(line.gamma) - 3.75).abs() < 1e-6);
    }

    #[test]
    fn zero_gain_is_transparent() {
        let line = GainLine::vacuum(0.025);
        for d in [-1e9, -3e7, 0.0, 2e7] {
            assert_eq!(line.intensity_gain(d), 1.0);
            assert_eq!(line.peak_advance(d), 0.0);
            assert_eq!(
                line.modulation_transfer_at(d, 1.3e6),
                Complex64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn calibrate_zero_db_has_no_gain() {
        let line = calibrate(0.0, 3e6, 0.1, angular_frequency(D1_WAVELENGTH)).unwrap();
        assert_eq!(line.g, 0.0);
    }

    #[test]
    fn calibrate_halves_db_at_hwhm() {
        let line = calibrate(3.01, 2e6, 0.01, angular_frequency(D1_WAVELENGTH)).unwrap();
        let db = line.intensity_gain_db(2.0 * PI * 1e6);
        assert!((db - 1.505).abs() < 1e-6, "{db}");
    }

    #[test]
    fn calibrate_rejects_bad_inputs() {
        let w = angular_frequency(D1_WAVELENGTH);
        assert!(calibrate(7.5, 0.0, 0.025, w).is_err());
        assert!(calibrate(7.5, -1.0, 0.025, w).is_err());
        assert!(calibrate(7.5, 1e7, 0.0, w).is_err());
        assert!(calibrate(-1.0, 1e7, 0.025, w).is_err());
    }

    #[test]
    fn peak_advance_arithmetic() {
        // n_g − 1 = −144 over 25 mm
        let dt = 0.025 / SPEED_OF_LIGHT * -144.0;
        assert!((dt * 1e9 + 12.0).abs() < 0.01);
        let line =
            line_for_advance(-12e-9, 1.25, 4.0, 0.025, angular_frequency(D1_WAVELENGTH)).unwrap();
        let d = 4.0 * line.gamma;
        assert!((line.peak_advance(d) * 1e9 + 12.0).abs() < 1e-3);
        assert!((line.intensity_gain(d) - 1.25).abs() < 1e-12);
        assert!(line.group_index(d) < -100.0);
    }

    #[test]
    fn transfer_is_unity_at_dc() {
        let line = calibrated();
        assert_eq!(
            line.modulation_transfer_at(1.2 * line.gamma, 0.0),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn transfer_phase_slope_matches_group_delay() {
        let line = calibrated();
        for x in [-3.0, -1.7, -0.5, 0.0, 0.4, 2.0, 3.5] {
            let offset = x * line.gamma;
            // finite-difference oracle on the phase of M
            let h = 100.0;
            let slope = -(line.modulation_transfer_at(offset, h).arg()
                - line.modulation_transfer_at(offset, -h).arg())
                / (2.0 * h)
                / (2.0 * PI);
            let expected = line.peak_advance(offset);
            assert!(rel(slope, expected) < 1e-2, "x={x}: {slope} vs {expected}");
        }
    }

    #[test]
    fn response_gain_matches_definition() {
        let line = calibrated();
        let grid: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.3 * line.gamma).collect();
        let r = line.response(&grid);
        for (i, &d) in grid.iter().enumerate() {
            let expected = (-2.0 * r.n_complex[i].im * line.optical_frequency(d) * line.length
                / SPEED_OF_LIGHT)
                .exp();
            assert!(rel(r.gain[i], expected) < 1e-12);
            assert!(r.group_index[i].is_finite());
        }
    }
}
