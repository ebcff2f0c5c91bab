//! Spec language round trips, parser diagnostics and derivative oracles.

use proptest::prelude::*;

use zygmund::corpus::{iterated_antiderivative, standard_corpus, tensorize, AnalyticFn, FnSpec, Regularity};
use zygmund::error::Error;
use zygmund::function::ScalarFn;

/// Floats whose shortest decimal form survives a print/parse cycle.
fn coefficient() -> impl Strategy<Value = f64> {
    (-64i32..=64, 0u32..=3).prop_map(|(n, k)| n as f64 / 2f64.powi(k as i32))
}

fn leaf() -> impl Strategy<Value = FnSpec> {
    prop_oneof![
        (1u32..=40).prop_map(|depth| FnSpec::Weierstrass { depth }),
        ((1u32..=20), 0u32..=8).prop_map(|(a, p)| FnSpec::PowerAbs { alpha: a as f64 / 20.0, p }),
        Just(FnSpec::TLog),
        prop::collection::vec(coefficient(), 1..=6).prop_map(FnSpec::Poly),
        Just(FnSpec::Sin),
        Just(FnSpec::Cos),
        Just(FnSpec::Exp),
        (coefficient(), 1u32..=16).prop_map(|(a, w)| FnSpec::Bump { a, b: a + w as f64 / 4.0 }),
        (1u32..=16).prop_map(|r| FnSpec::Cutoff { r: r as f64 / 4.0 }),
    ]
}

fn one_dimensional() -> impl Strategy<Value = FnSpec> {
    prop_oneof![
        3 => leaf(),
        1 => (1usize..=3, leaf()).prop_map(|(m, inner)| FnSpec::Antideriv { m, inner: Box::new(inner) }),
    ]
}

fn spec() -> impl Strategy<Value = FnSpec> {
    prop_oneof![
        3 => one_dimensional(),
        1 => prop::collection::vec(one_dimensional(), 1..=3).prop_map(FnSpec::Tensor),
    ]
}

proptest! {
    #[test]
    fn display_then_parse_is_identity(s in spec()) {
        let text = s.to_string();
        let back: FnSpec = text.parse().unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn evaluation_is_deterministic(s in one_dimensional(), x in -1.0f64..1.0) {
        let f = AnalyticFn::new(s).unwrap();
        prop_assert_eq!(f.eval(&x).unwrap().to_bits(), f.eval(&x).unwrap().to_bits());
    }
}

fn parse_error(text: &str) -> (usize, String) {
    match text.parse::<FnSpec>() {
        Err(Error::Parse { position, token, .. }) => (position, token),
        other => panic!("expected a parse error for `{text}`, got {other:?}"),
    }
}

#[test]
fn unknown_keys_are_reported_with_position() {
    assert_eq!(parse_error("weierstrass:depht=20"), (12, "depht".to_string()));
    assert_eq!(parse_error("power_abs:alpha=0.5,q=2"), (20, "q".to_string()));
    assert_eq!(parse_error("sine").1, "sine");
}

#[test]
fn malformed_specs_are_rejected() {
    for bad in ["", "sin(", "tensor(sin,", "poly:", "sin)", "weierstrass:depth=2.5", "antideriv:m=1"] {
        assert!(bad.parse::<FnSpec>().is_err(), "`{bad}` parsed");
    }
    for bad in ["weierstrass:depth=0", "power_abs:alpha=1.5", "antideriv:m=4(sin)", "tensor(sin, sin, sin, sin)"] {
        assert!(bad.parse::<AnalyticFn>().is_err(), "`{bad}` validated");
    }
}

#[test]
fn parameter_lists_and_siblings_are_told_apart() {
    let s: FnSpec = "tensor(power_abs:alpha=0.5, poly:1,0,2)".parse().unwrap();
    assert_eq!(
        s,
        FnSpec::Tensor(vec![FnSpec::PowerAbs { alpha: 0.5, p: 0 }, FnSpec::Poly(vec![1.0, 0.0, 2.0])])
    );
    assert_eq!("zero".parse::<FnSpec>().unwrap(), FnSpec::Poly(vec![0.0]));
}

/// Fourth-order centered difference of `f^(k)` at `x`.
fn centered(f: &AnalyticFn, k: usize, x: f64, h: f64) -> f64 {
    let d = |t: f64| f.derivative(k, &t).unwrap();
    (d(x - 2.0 * h) - 8.0 * d(x - h) + 8.0 * d(x + h) - d(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn derivative_oracles_match_centered_differences() {
    let cases = [
        ("sin", 0.3),
        ("exp", -0.4),
        ("poly:1,-2,0,3", 0.7),
        ("bump:a=-1,b=1", 0.2),
        ("cutoff:r=1", 1.3),
        ("power_abs:alpha=0.5,p=2", 0.4),
        ("antideriv:m=2(weierstrass:depth=12)", 0.1),
        ("antideriv:m=1(tlog)", 0.15),
        ("weierstrass:depth=8", 0.25),
    ];
    for (text, x) in cases {
        let f: AnalyticFn = text.parse().unwrap();
        let top = f.max_exact_derivative_order().unwrap_or(3).min(3);
        for k in 0..top {
            let oracle = f.derivative(k + 1, &x).unwrap();
            let fd = centered(&f, k, x, 1e-5);
            let tol = 1e-6 * oracle.abs().max(1.0);
            assert!((oracle - fd).abs() <= tol, "{text}: order {} oracle {oracle} vs {fd}", k + 1);
        }
    }
}

#[test]
fn derivative_budget_is_enforced() {
    let f: AnalyticFn = "power_abs:alpha=0.5,p=1".parse().unwrap();
    assert_eq!(f.max_exact_derivative_order(), Some(1));
    assert!(f.derivative(1, &0.3).is_ok());
    assert!(matches!(f.derivative(2, &0.3), Err(Error::MissingDerivative { .. })));
}

#[test]
fn antiderivatives_invert_differentiation() {
    for text in ["sin", "weierstrass:depth=10", "tlog", "power_abs:alpha=0.3"] {
        let f: AnalyticFn = text.parse().unwrap();
        let big_f = iterated_antiderivative(&f, 2).unwrap();
        assert_eq!(big_f.eval(&0.0).unwrap(), 0.0);
        for x in [-0.2, 0.05, 0.2] {
            let d2 = big_f.derivative(2, &x).unwrap();
            assert!((d2 - f.eval(&x).unwrap()).abs() < 1e-12, "{text} at {x}");
        }
        assert_eq!(big_f.label().order(), f.label().order().map(|m| m + 2));
    }
}

#[test]
fn tensor_labels_take_the_weakest_factor() {
    let a: AnalyticFn = "power_abs:alpha=0.5".parse().unwrap();
    let b: AnalyticFn = "weierstrass".parse().unwrap();
    let t = tensorize(&[a, b]).unwrap();
    assert_eq!(t.dim(), 2);
    assert_eq!(t.label(), Regularity::Holder { m: 0, alpha: 0.5 });
    let v = t.eval_point(&[0.25, 0.0]).unwrap();
    assert!((v - 0.5).abs() < 1e-15);
    assert!(t.eval_point(&[0.25]).is_err());
}

#[test]
fn standard_corpus_is_well_formed() {
    let corpus = standard_corpus();
    assert_eq!(corpus.len(), 14);
    for e in &corpus {
        assert!(e.interval.0 < e.interval.1);
        let round: AnalyticFn = e.function.to_string().parse().unwrap();
        assert_eq!(&round, &e.function);
    }
}
