//! Seminorm properties, exponent estimates and classifier behaviour on the corpus.

use proptest::prelude::*;

use zygmund::corpus::AnalyticFn;
use zygmund::seminorm::{
    classify, classify_with, estimate_exponent, holder_seminorm, lambda_norm, lip_norm, sample_fn,
    sample_fn_with_derivatives, zygmund_seminorm, ClassifyOptions, Criterion, Divergence, ModulusSpec, SampledFn,
    ScaleSet,
};

fn grid(values: Vec<f64>) -> SampledFn {
    let n = values.len();
    SampledFn::new(0.0, 1.0 / (n - 1) as f64, values).unwrap()
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 9..80)
}

fn zyg(f: &SampledFn) -> f64 {
    zygmund_seminorm(f, (f.lo, f.hi()), ScaleSet::All).unwrap().value
}

fn hol(f: &SampledFn, a: f64) -> f64 {
    holder_seminorm(f, ModulusSpec::Power(a), (f.lo, f.hi()), ScaleSet::All).unwrap().value
}

proptest! {
    #[test]
    fn seminorms_are_homogeneous(v in samples(), lambda in -4.0f64..4.0, a in 0.1f64..=1.0) {
        let f = grid(v);
        let g = f.scaled(lambda);
        prop_assert!((zyg(&g) - lambda.abs() * zyg(&f)).abs() <= 1e-12 * (1.0 + zyg(&g)));
        prop_assert!((hol(&g, a) - lambda.abs() * hol(&f, a)).abs() <= 1e-12 * (1.0 + hol(&g, a)));
    }

    #[test]
    fn seminorms_are_subadditive(pair in (9usize..60).prop_flat_map(|n| {
        (prop::collection::vec(-5.0f64..5.0, n), prop::collection::vec(-5.0f64..5.0, n))
    }), a in 0.1f64..=1.0) {
        let (f, g) = (grid(pair.0), grid(pair.1));
        let s = f.sum(&g).unwrap();
        prop_assert!(zyg(&s) <= (zyg(&f) + zyg(&g)) * (1.0 + 1e-12));
        prop_assert!(hol(&s, a) <= (hol(&f, a) + hol(&g, a)) * (1.0 + 1e-12));
    }

    #[test]
    fn refining_the_grid_never_lowers_the_supremum(v in prop::collection::vec(-3.0f64..3.0, 9..40), a in 0.1f64..=1.0) {
        // The fine grid interleaves new samples between the coarse ones, so
        // every coarse pair (x, h) is also a fine pair.
        let coarse = grid(v.clone());
        let mut fine_values = Vec::new();
        for w in v.windows(2) {
            fine_values.push(w[0]);
            fine_values.push(0.5 * (w[0] + w[1]) + 0.1);
        }
        fine_values.push(*v.last().unwrap());
        let fine = grid(fine_values);
        prop_assert!(zyg(&coarse) <= zyg(&fine) * (1.0 + 1e-12));
        prop_assert!(hol(&coarse, a) <= hol(&fine, a) * (1.0 + 1e-12));
    }
}

#[test]
fn affine_functions_have_zero_zygmund_seminorm() {
    let f = grid((0..65).map(|i| 3.0 - 0.5 * i as f64).collect());
    assert!(zyg(&f) < 1e-12);
}

#[test]
fn witness_attains_the_supremum() {
    let f: AnalyticFn = "power_abs:alpha=0.5".parse().unwrap();
    let s = sample_fn(&f, -1.0, 1.0, 4097).unwrap();
    let r = holder_seminorm(&s, ModulusSpec::Power(0.5), (-1.0, 1.0), ScaleSet::All).unwrap();
    let w = r.witness.unwrap();
    let direct = (f.eval_point(&[w.x + w.h]).unwrap() - f.eval_point(&[w.x]).unwrap()).abs() / w.h.sqrt();
    assert!((direct - r.value).abs() < 1e-9, "{direct} vs {}", r.value);
    assert!(r.value <= 2f64.sqrt() + 1e-9);
}

#[test]
fn tlog_modulus_is_bounded_for_tlog() {
    let f: AnalyticFn = "tlog".parse().unwrap();
    let s = sample_fn(&f, -0.25, 0.25, 8193).unwrap();
    let v = holder_seminorm(&s, ModulusSpec::TLog, (-0.25, 0.25), ScaleSet::All).unwrap().value;
    assert!(v.is_finite() && v < 3.0, "{v}");
}

#[test]
fn norms_of_sin_are_stable_under_refinement() {
    let f: AnalyticFn = "sin".parse().unwrap();
    let norm = |points: usize| {
        let s = sample_fn_with_derivatives(&f, -1.0, 1.0, points, 2).unwrap();
        (lambda_norm(&s, 2.0, ScaleSet::Dyadic).unwrap(), lip_norm(&s, 2, ScaleSet::Dyadic).unwrap())
    };
    let (l1, p1) = norm(4097);
    let (l2, p2) = norm(8193);
    assert!((l1 - l2).abs() / l2 < 0.02, "{l1} vs {l2}");
    assert!((p1 - p2).abs() / p2 < 0.02, "{p1} vs {p2}");
    let s = sample_fn(&f, -1.0, 1.0, 129).unwrap();
    assert!(lambda_norm(&s, 2.0, ScaleSet::All).is_err());
}

#[test]
fn estimates_recover_known_exponents() {
    for (text, n, want, tol) in [
        ("power_abs:alpha=0.3", 1, 0.3, 0.05),
        ("power_abs:alpha=0.7", 1, 0.7, 0.05),
        ("weierstrass:depth=20", 2, 1.0, 0.1),
        ("sin", 1, 1.0, 0.05),
    ] {
        let f: AnalyticFn = text.parse().unwrap();
        let s = sample_fn(&f, -1.0, 1.0, (1 << 16) + 1).unwrap();
        let r = estimate_exponent(&s, n, (-1.0, 1.0)).unwrap();
        let e = r.exponent.unwrap();
        assert!((e - want).abs() <= tol, "{text}: {e}");
    }
}

#[test]
fn weierstrass_is_zygmund_but_not_lipschitz() {
    let f: AnalyticFn = "weierstrass:depth=20".parse().unwrap();
    let s = sample_fn(&f, -1.0, 1.0, (1 << 16) + 1).unwrap();
    let r = classify(&s, 0, (-1.0, 1.0)).unwrap();
    let v = r.verdicts.unwrap();
    assert!(v.zygmund && !v.lipschitz);
    assert_eq!(v.get(Criterion::Holder(0.5)), Some(true));
}

#[test]
fn derivative_route_agrees_with_difference_route() {
    let f: AnalyticFn = "antideriv:m=1(tlog)".parse().unwrap();
    let s = sample_fn_with_derivatives(&f, -0.25, 0.25, (1 << 16) + 1, 1).unwrap();
    let r = classify_with(&s, 1, (-0.25, 0.25), &ClassifyOptions::default()).unwrap();
    let v = r.verdicts.unwrap();
    let d = v.derivative_route.expect("derivative samples were supplied");
    assert_eq!((v.zygmund, v.lipschitz), (true, false));
    assert_eq!((d.zygmund, d.lipschitz), (true, false));
    let lip = r
        .criteria
        .iter()
        .find(|c| c.criterion == Some(Criterion::Lipschitz) && c.route == "difference")
        .unwrap();
    assert_eq!(lip.divergence, Divergence::Logarithmic);
}

#[test]
fn reports_serialize_deterministically() {
    let f: AnalyticFn = "power_abs:alpha=0.5".parse().unwrap();
    let s = sample_fn(&f, -1.0, 1.0, 4097).unwrap();
    let a = classify(&s, 0, (-1.0, 1.0)).unwrap();
    let b = classify(&s, 0, (-1.0, 1.0)).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let csv = a.criteria_csv().unwrap();
    assert!(csv.starts_with("table,h,statistic,witness_x\n"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 4 || l.starts_with('"')));
}
