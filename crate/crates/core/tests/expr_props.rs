//! Parser round trip, lowering soundness and certifier properties.

use fractal_hh::expr::{certify_gks2, lower_to_poly, parse, CertGrid, Expr, FunctionHandle, Lowered, ParamExpr};
use proptest::prelude::*;

fn param() -> impl Strategy<Value = ParamExpr> {
    let leaf = prop_oneof![
        (0u32..40).prop_map(|k| ParamExpr::Num(k as f64 / 4.0)),
        Just(ParamExpr::Alpha),
        Just(ParamExpr::S),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| ParamExpr::Neg(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ParamExpr::Add(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ParamExpr::Sub(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ParamExpr::Mul(Box::new(l), Box::new(r))),
            (inner.clone(), inner).prop_map(|(l, r)| ParamExpr::Div(Box::new(l), Box::new(r))),
        ]
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(Expr::X), (0u32..100).prop_map(|k| Expr::Num(k as f64 / 8.0))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Abs(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Add(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Sub(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Mul(Box::new(l), Box::new(r))),
            (inner, param()).prop_map(|(b, p)| Expr::Pow(Box::new(b), p)),
        ]
    })
}

/// Expressions built from shapes the lowering is meant to accept.
fn lowerable() -> impl Strategy<Value = String> {
    let atom = prop_oneof![
        (1u32..9).prop_map(|c| format!("{}", c as f64 / 4.0)),
        Just("x".to_string()),
        Just("x^(a)".to_string()),
        Just("x^(s*a)".to_string()),
        (1u32..8).prop_map(|m| format!("(x-{})^(2*a)", m as f64 / 4.0)),
        (1u32..8).prop_map(|m| format!("({}-x)^(a)", m as f64 / 4.0)),
        (1u32..4).prop_map(|n| format!("(x-0.5)^{n}")),
        (0u32..4).prop_map(|m| format!("(2*x+{})^(s)", m)),
    ];
    prop::collection::vec((atom, 0u32..3), 1..5).prop_map(|parts| {
        parts
            .into_iter()
            .enumerate()
            .map(|(i, (t, op))| match (i, op) {
                (0, _) => t,
                (_, 0) => format!(" + {t}"),
                (_, 1) => format!(" - {t}"),
                _ => format!(" + 3 * {t}"),
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parse_print_round_trip(e in expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e);
    }

    #[test]
    fn lowering_agrees_with_pointwise_evaluation(
        text in lowerable(),
        ai in 0usize..4,
        si in 0usize..3,
        seed in any::<u64>(),
    ) {
        let alpha = [0.3, 0.5, 0.7, 1.0][ai];
        let s = [0.25, 0.5, 1.0][si];
        let ast = parse(&text).unwrap();
        let poly = match lower_to_poly(&ast, alpha, s) {
            Lowered::Poly(p) => p,
            Lowered::NotPolynomial => panic!("{text} should lower"),
        };
        let mut state = seed | 1;
        for _ in 0..1000 {
            // xorshift keeps the sample points reproducible per case
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let x = (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0;
            let want = ast.eval(x, alpha, s);
            let got = poly.eval(x);
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{text} at {x}: {got} vs {want}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    /// Products lower whenever every pair of terms can be multiplied; the
    /// result must agree with the product of the factors.
    #[test]
    fn products_agree_with_pointwise_evaluation(
        l in lowerable(),
        r in lowerable(),
        ai in 0usize..4,
        xs in prop::collection::vec(0.0f64..4.0, 64),
    ) {
        let alpha = [0.3, 0.5, 0.7, 1.0][ai];
        let text = format!("({l}) * ({r})");
        let ast = parse(&text).unwrap();
        if let Lowered::Poly(p) = lower_to_poly(&ast, alpha, 0.5) {
            for x in xs {
                let want = ast.eval(x, alpha, 0.5);
                let got = p.eval(x);
                prop_assert!((got - want).abs() <= 1e-11 * want.abs().max(1.0), "{text} at {x}: {got} vs {want}");
            }
        }
    }
}

fn grid() -> CertGrid {
    CertGrid {
        n_uv: 24,
        n_lambda: 13,
        n_random: 64,
        ..CertGrid::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nonnegative_combinations_stay_certified(c1 in 0.0f64..5.0, c2 in 0.0f64..5.0, ai in 0usize..3, si in 0usize..3) {
        let alpha = [0.3, 0.6, 1.0][ai];
        let s = [0.25, 0.5, 1.0][si];
        let f = FunctionHandle::parse("x^(s*a)", alpha, s).unwrap();
        let g = FunctionHandle::parse("1 + (x-0.5)^(2*a)", alpha, s).unwrap();
        let dom = (0.0, 2.0);
        prop_assert!(certify_gks2(|x| f.value(x), alpha, s, dom, &grid()).unwrap().certified);
        prop_assert!(certify_gks2(|x| g.value(x), alpha, s, dom, &grid()).unwrap().certified);
        let h = |x: f64| c1 * f.value(x) + c2 * g.value(x);
        prop_assert!(certify_gks2(h, alpha, s, dom, &grid()).unwrap().certified);
    }

    #[test]
    fn certification_is_monotone_in_tolerance(t in 1e-12f64..1e-2, bump in 1.0f64..100.0, k in 0u32..6) {
        let f = FunctionHandle::parse(["x^(s*a)", "2 - x", "x^2", "abs(1-2*x)", "(x-0.3)^(a)", "1 + x^(a)"][k as usize], 0.5, 0.5).unwrap();
        let strict = CertGrid { tol: t, ..grid() };
        let loose = CertGrid { tol: t * bump, ..grid() };
        let a = certify_gks2(|x| f.value(x), 0.5, 0.5, (0.0, 1.0), &strict).unwrap();
        let b = certify_gks2(|x| f.value(x), 0.5, 0.5, (0.0, 1.0), &loose).unwrap();
        prop_assert!(!a.certified || b.certified);
    }
}
