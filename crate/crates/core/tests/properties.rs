mod common;

use cohtx::metrics::{ccdf, mults_cascade, mults_jfscd, q_from_ber};
use cohtx::params::derive_beta2;
use cohtx::rxdsp::{demap_symbols, map_bits};
use cohtx::sbc::{clip_sample, threshold_from_cr};
use cohtx::waveform::relative_l2;
use cohtx::Complex64;
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = Complex64> {
    (-50.0f64..50.0, -50.0f64..50.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #[test]
    fn clipping_is_idempotent_and_bounded(x in sample(), a in 0.01f64..20.0) {
        let once = clip_sample(x, a);
        prop_assert_eq!(clip_sample(once, a), once);
        prop_assert!(once.re.abs().max(once.im.abs()) <= a + 1e-12);
        if x != Complex64::new(0.0, 0.0) {
            prop_assert!((once.arg() - x.arg()).abs() < 1e-14);
        }
    }

    #[test]
    fn clipping_is_monotone_in_threshold(x in sample(), a in 0.01f64..20.0, b in 0.01f64..20.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(clip_sample(x, lo).norm() <= clip_sample(x, hi).norm());
    }

    #[test]
    fn threshold_scales_with_rms(p in 1e-6f64..1e6, cr in -10.0f64..20.0) {
        let a = threshold_from_cr(p, cr).unwrap();
        prop_assert!((a / p.sqrt() - 10f64.powf(cr / 20.0)).abs() < 1e-12 * a / p.sqrt());
    }

    #[test]
    fn beta2_is_linear_in_d(d in -40.0f64..40.0, lambda in 1.2e-6f64..1.7e-6) {
        prop_assert_eq!(derive_beta2(2.0 * d, lambda).unwrap(), 2.0 * derive_beta2(d, lambda).unwrap());
        prop_assert!(derive_beta2(d, lambda).unwrap() * d <= 0.0);
    }

    #[test]
    fn q_falls_as_ber_rises(a in 1e-12f64..0.5, b in 1e-12f64..0.5) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(q_from_ber(lo) > q_from_ber(hi));
    }

    #[test]
    fn ccdf_is_a_nonincreasing_probability(paprs in prop::collection::vec(0.0f64..15.0, 1..200)) {
        let thresholds: Vec<f64> = (0..40).map(|i| i as f64 * 0.4).collect();
        let c = ccdf(&paprs, &thresholds, 1024);
        for w in c.probabilities.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(c.probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn qam_round_trips(bits in prop::collection::vec(0u8..2, 0..64usize).prop_map(|mut v| { v.truncate(v.len() / 4 * 4); v })) {
        prop_assert_eq!(demap_symbols(&map_bits(&bits).unwrap()), bits);
    }

    #[test]
    fn joint_architecture_is_cheaper(exp in 5u32..=10, alpha in 0.0f64..=0.2) {
        let n = 1usize << exp;
        prop_assert!(mults_jfscd(n, alpha) / mults_cascade(n, 21) < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn joint_engine_is_linear(seed1 in 0u64..1000, seed2 in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let k = common::constants(128, 0.2, 100e3);
        let s1 = common::symbols(2048, seed1);
        let s2 = common::symbols(2048, seed2 + 1000);
        let mix: Vec<Complex64> = s1.iter().zip(&s2).map(|(x, y)| x * a + y * b).collect();
        let lhs = common::jfscd(&mix, &k);
        let (w1, w2) = (common::jfscd(&s1, &k), common::jfscd(&s2, &k));
        let rhs: Vec<Complex64> = w1.samples.iter().zip(&w2.samples).map(|(x, y)| x * a + y * b).collect();
        prop_assert!(relative_l2(&lhs.samples, &rhs) < 1e-12);
    }
}
