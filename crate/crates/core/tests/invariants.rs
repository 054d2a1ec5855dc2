use std::f64::consts::PI;

use proptest::prelude::*;

use fastlight::analysis::{cross_correlation, peak_delay, BandFilter};
use fastlight::channel::{loss_channel, snu_out};
use fastlight::dispersion::{angular_frequency, GainLine, D1_WAVELENGTH};
use fastlight::sim::{shot_reference, Trace};

fn line(g: f64, gamma_hz: f64) -> GainLine {
    GainLine::new(
        g,
        2.0 * PI * gamma_hz,
        angular_frequency(D1_WAVELENGTH),
        0.025,
    )
    .unwrap()
}

fn noise(n: usize, seed: u64) -> Trace {
    shot_reference(1e4, 1e4, n, 2.5e8, seed).unwrap().0
}

proptest! {
    #[test]
    fn modulation_transfer_is_hermitian(
        g in 1e-6f64..1e-3, gamma_hz in 1e6f64..2e7, x in -6.0f64..6.0, f in 1e3f64..5e7,
    ) {
        let l = line(g, gamma_hz);
        let offset = x * l.gamma;
        let plus = l.modulation_transfer_at(offset, f);
        let minus = l.modulation_transfer_at(offset, -f);
        prop_assert!((plus - minus.conj()).norm() <= 1e-12 * plus.norm().max(1.0));
    }

    #[test]
    fn field_transfer_squares_to_gain(g in 0.0f64..1e-3, gamma_hz in 1e6f64..2e7, x in -10.0f64..10.0) {
        let l = line(g, gamma_hz);
        let delta = x * l.gamma;
        let gain = l.intensity_gain(delta);
        prop_assert!((l.field_transfer(delta).norm_sqr() - gain).abs() <= 1e-12 * gain);
        prop_assert!(gain >= 1.0);
    }

    #[test]
    fn losses_compose(a in 0.0f64..=1.0, b in 0.0f64..=1.0, s in 0.0f64..20.0) {
        let stepwise = loss_channel(a, loss_channel(b, s).unwrap()).unwrap();
        prop_assert!((stepwise - loss_channel(a * b, s).unwrap()).abs() <= 1e-12 * s.max(1.0));
    }

    #[test]
    fn amplifier_never_reduces_snu(gain in 1.0f64..10.0, s in 0.0f64..10.0) {
        prop_assert!(snu_out(gain, s) >= s.min(1.0) - 1e-12);
        prop_assert!(snu_out(gain, 1.0) >= 1.0);
    }

    #[test]
    fn band_filter_is_bounded_and_zero_at_dc(lo in 1e3f64..1e6, ratio in 1.5f64..100.0, f in 0.0f64..1e9) {
        let filter = BandFilter::new(lo, lo * ratio).unwrap();
        let h = filter.response(f);
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert_eq!(filter.response(0.0), 0.0);
    }

    #[test]
    fn binary_round_trip_is_exact(log_n in 1u32..10, seed in any::<u64>(), rate in 1.0f64..1e10) {
        let t = noise(1 << log_n, seed);
        let t = Trace::new(t.samples().to_vec(), rate, t.mean_flux()).unwrap();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        let back = Trace::read_binary(buf.as_slice()).unwrap();
        prop_assert_eq!(back.samples(), t.samples());
        prop_assert_eq!(back.sample_rate().to_bits(), rate.to_bits());
        prop_assert_eq!(back.mean_flux().to_bits(), t.mean_flux().to_bits());
    }

    #[test]
    fn csv_round_trip_is_exact(log_n in 1u32..9, seed in any::<u64>()) {
        let t = noise(1 << log_n, seed);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Trace::read_csv(buf.as_slice(), t.sample_rate(), t.mean_flux()).unwrap();
        prop_assert_eq!(back.samples(), t.samples());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalized_correlation_is_bounded(seed in any::<u64>(), shift in -40isize..40) {
        let a = noise(1 << 10, seed);
        let b = noise(1 << 10, seed ^ 0x5555).difference(&a.shifted(shift)).unwrap();
        let c = cross_correlation(&a, &b, 100.0 / 2.5e8).unwrap();
        prop_assert!(c.values.iter().all(|v| v.abs() <= 1.0 + 1e-9));
        let auto = cross_correlation(&a, &a, 100.0 / 2.5e8).unwrap();
        prop_assert!((auto.peak_value() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn swapping_channels_negates_delay(seed in any::<u64>(), shift in -30isize..30) {
        let a = noise(1 << 11, seed);
        let b = a.shifted(shift);
        let c_fast = cross_correlation(&a, &b, 50.0 / 2.5e8).unwrap();
        let c_back = cross_correlation(&b, &a, 50.0 / 2.5e8).unwrap();
        let c_ref = cross_correlation(&a, &a, 50.0 / 2.5e8).unwrap();
        let forward = peak_delay(&c_fast, &c_ref).unwrap();
        let backward = peak_delay(&c_back, &c_ref).unwrap();
        prop_assert!((forward + backward).abs() <= 1e-15);
        prop_assert!((forward - shift as f64 / 2.5e8).abs() <= 1e-3 / 2.5e8);
    }
}
