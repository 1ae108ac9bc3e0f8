//! Invariants of the inequality harness.

use fractal_hh::calculus::{abs_moment, LfiBackend};
use fractal_hh::expr::FunctionHandle;
use fractal_hh::harness::{endpoint_constant, k_constant, verify_thm31, TheoremCase, TheoremId, VerificationResult};
use fractal_hh::Error;
use proptest::prelude::*;

const FAMILY: [&str; 5] = ["x^(s*a)", "1", "1 + x^(s*a)", "x^(a)", "(x - 0.5)^(s*a)"];

/// `None` when the case fails its hypotheses, e.g. `(x - 0.5)^(s*a)` with
/// `s * alpha = 1` is the plain line `x - 0.5` and goes negative.
fn certified(case: &TheoremCase) -> Option<VerificationResult> {
    match verify_thm31(case) {
        Err(Error::Rejected(_)) => None,
        r => Some(r.unwrap()),
    }
}

fn thm31(f: &str, alpha: f64, s: f64, a: f64, b: f64) -> TheoremCase {
    TheoremCase::new(TheoremId::Thm31, f, alpha, s, None, a, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_is_coherent(k in 0usize..5, ai in 0usize..5, si in 0usize..4, a in 0.0f64..2.0, len in 0.1f64..3.0) {
        let alpha = [0.3, 0.5, 0.7, 0.9, 1.0][ai];
        let s = [0.25, 0.5, 0.75, 1.0][si];
        let r = certified(&thm31(FAMILY[k], alpha, s, a, a + len));
        prop_assume!(r.is_some());
        let r = r.unwrap();
        prop_assert!(r.pass, "{} alpha {alpha} s {s} [{a}, {}]: {r:?}", FAMILY[k], a + len);
    }

    #[test]
    fn chain_is_coherent_under_quadrature_at_alpha_one(k in 0usize..5, si in 0usize..4, a in 0.0f64..2.0, len in 0.1f64..3.0) {
        let s = [0.25, 0.5, 0.75, 1.0][si];
        let case = thm31(FAMILY[k], 1.0, s, a, a + len).with_backend(LfiBackend::quadrature());
        let r = certified(&case);
        prop_assume!(r.is_some());
        prop_assert!(r.unwrap().pass);
    }

    #[test]
    fn chain_scales_with_the_function(k in 0usize..5, ai in 0usize..5, c in 0.01f64..100.0) {
        let alpha = [0.3, 0.5, 0.7, 0.9, 1.0][ai];
        let base = verify_thm31(&thm31(FAMILY[k], alpha, 0.5, 0.0, 2.0)).unwrap();
        let scaled = verify_thm31(&thm31(&format!("{c} * ({})", FAMILY[k]), alpha, 0.5, 0.0, 2.0)).unwrap();
        let close = |x: f64, y: f64| (x - c * y).abs() <= 1e-13 * (c * y).abs().max(1e-300);
        prop_assert!(close(scaled.lhs, base.lhs));
        prop_assert!(close(scaled.mid.unwrap(), base.mid.unwrap()));
        prop_assert!(close(scaled.rhs, base.rhs));
        prop_assert_eq!(scaled.pass, base.pass);
    }

    #[test]
    fn chain_is_translation_invariant(k in 0usize..5, ai in 0usize..5, delta in 0.0f64..5.0) {
        let alpha = [0.3, 0.5, 0.7, 0.9, 1.0][ai];
        let base = thm31(FAMILY[k], alpha, 0.5, 0.25, 1.5);
        let shifted_poly = base.f.poly().unwrap().compose_affine(1.0, -delta).unwrap();
        let shifted = TheoremCase {
            f: FunctionHandle::from_poly(shifted_poly),
            a: 0.25 + delta,
            b: 1.5 + delta,
            ..base.clone()
        };
        let (x, y) = (verify_thm31(&base).unwrap(), verify_thm31(&shifted).unwrap());
        for (u, v) in [(x.lhs, y.lhs), (x.mid.unwrap(), y.mid.unwrap()), (x.rhs, y.rhs)] {
            prop_assert!((u - v).abs() <= 1e-11 * u.abs().max(1.0), "{u} vs {v}");
        }
    }
}

#[test]
fn endpoint_constant_decreases_in_s() {
    for alpha in [0.3, 0.5, 0.7, 0.9, 1.0] {
        let values: Vec<f64> = (1..=20).map(|i| endpoint_constant(alpha, i as f64 / 20.0)).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "alpha {alpha}: {values:?}");
    }
}

#[test]
fn k_matches_the_weighted_integral_classically() {
    for s in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let k = k_constant(1.0, s);
        for backend in [LfiBackend::operational(), LfiBackend::quadrature()] {
            let m = abs_moment(s, 1.0, &backend).unwrap();
            assert!(((k - m) / m).abs() <= 1e-10, "s {s} {}: {k} vs {m}", backend.label());
        }
    }
}
