//! Stitched curves, curve families, adversarial curves and the Boman test.

use proptest::prelude::*;

use zygmund::corpus::AnalyticFn;
use zygmund::curvelab::{
    adversarial_curve, boman_test, compose, default_anchors, rescaling_identity, select_witnesses, stitch_curves,
    BomanConfig, BoxDomain, Curve, CurveFamily, PolyCurve, WitnessPair,
};
use zygmund::error::Error;
use zygmund::seminorm::Criterion;

fn segment(d: usize) -> impl Strategy<Value = PolyCurve> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 1..=4), d).prop_map(|c| PolyCurve::new(c).unwrap())
}

fn configuration() -> impl Strategy<Value = (Vec<PolyCurve>, Vec<f64>)> {
    (1usize..=3, 1usize..=10).prop_flat_map(|(d, n)| {
        (prop::collection::vec(segment(d), n), prop::collection::vec(0.02f64..0.6, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windows_reproduce_segments_exactly((segments, widths) in configuration(), u in -1.0f64..=1.0) {
        let curve = stitch_curves(segments.clone(), &widths, None, None, None).unwrap();
        for (piece, seg) in curve.pieces.iter().zip(&segments) {
            let t = piece.anchor + u * piece.half_width;
            for k in 0..=4 {
                prop_assert_eq!(curve.eval_curve(t, k), seg.eval_curve(t - piece.anchor, k));
            }
        }
    }

    #[test]
    fn stitched_curves_are_continuous_to_order_four((segments, widths) in configuration()) {
        let curve = stitch_curves(segments, &widths, None, None, None).unwrap();
        let report = curve.continuity_report();
        prop_assert!(report.passed, "max probe jump {:e}, exact {:e}", report.max_probe_jump, report.max_exact_jump);
    }
}

#[test]
fn default_anchors_leave_gaps_equal_to_the_left_width() {
    let widths = [0.5, 0.25, 0.125, 0.3];
    let anchors = default_anchors(&widths);
    assert_eq!(anchors[0], 0.0);
    for n in 1..widths.len() {
        let gap = (anchors[n] - widths[n]) - (anchors[n - 1] + widths[n - 1]);
        assert!((gap - widths[n - 1]).abs() < 1e-15);
    }
}

#[test]
fn curve_is_constant_outside_its_range() {
    let seg = PolyCurve::new(vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap();
    let curve = stitch_curves(vec![seg], &[0.5], Some(&[0.0]), Some(vec![3.0, -1.0]), None).unwrap();
    let (a, b) = curve.t_range();
    for t in [a - 1.0, b + 0.5] {
        assert_eq!(curve.point(t), vec![3.0, -1.0]);
        assert_eq!(curve.eval_curve(t, 2), vec![0.0, 0.0]);
    }
    assert_eq!(curve.eval_curve(0.25, 1), vec![1.0, 0.5]);
}

#[test]
fn overlapping_windows_are_rejected() {
    let seg = || PolyCurve::affine(&[0.0], &[1.0]).unwrap();
    let err = stitch_curves(vec![seg(), seg()], &[0.5, 0.5], Some(&[0.0, 0.9]), None, None).unwrap_err();
    assert!(matches!(err, Error::OverlappingWindows(0, 1)), "{err:?}");
}

#[test]
fn domain_escape_is_reported() {
    let domain = BoxDomain::cube(-1.0, 1.0, 1).unwrap();
    let seg = PolyCurve::affine(&[0.0], &[4.0]).unwrap();
    let err = stitch_curves(vec![seg], &[0.5], None, Some(vec![0.0]), Some(&domain)).unwrap_err();
    assert!(matches!(err, Error::DomainEscape(_)), "{err:?}");
}

#[test]
fn families_are_seeded_and_stay_in_the_box() {
    let domain = BoxDomain::cube(-0.5, 2.0, 2).unwrap();
    let a = CurveFamily::random_polynomials(9, 16, 3, &domain).unwrap();
    let b = CurveFamily::random_polynomials(9, 16, 3, &domain).unwrap();
    let c = CurveFamily::random_polynomials(10, 16, 3, &domain).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    for m in &a.members {
        for i in 0..=64 {
            let t = m.interval[0] + (m.interval[1] - m.interval[0]) * i as f64 / 64.0;
            assert!(domain.contains(&m.curve.point(t)));
        }
    }
}

#[test]
fn composition_derivatives_match_differences() {
    let f: AnalyticFn = "tensor(sin, exp)".parse().unwrap();
    let c = PolyCurve::new(vec![vec![0.1, 0.5, -0.3, 0.2], vec![-0.2, 0.4, 0.1]]).unwrap();
    let s = compose(&f, &c, (-0.5, 0.5), 2001, 3, None).unwrap();
    let dt = s.spacing;
    for i in [200usize, 1000, 1700] {
        for j in 1..=3 {
            let lower = if j == 1 { &s.values } else { &s.derivatives[j - 2] };
            let fd = (lower[i + 1] - lower[i - 1]) / (2.0 * dt);
            assert!((s.derivatives[j - 1][i] - fd).abs() < 1e-5, "order {j} at {i}");
        }
    }
}

#[test]
fn adversarial_curve_passes_each_witness_with_the_prescribed_velocity() {
    let f: AnalyticFn = "tensor(power_abs:alpha=0.5, poly:0,0,1)".parse().unwrap();
    let domain = BoxDomain::cube(-1.0, 1.0, 2).unwrap();
    let (limit, pairs) = select_witnesses(&f, &[0.01, 0.0], &[1.0, 0.0], Criterion::Zygmund, 8, &domain).unwrap();
    let adv = adversarial_curve(&limit, &pairs, Some(&domain)).unwrap();
    for (p, &(n, t, s)) in pairs.iter().zip(&adv.windows) {
        assert_eq!(adv.curve.point(t), p.x);
        let hn = p.h.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = adv.curve.eval_curve(t, 1);
        for (vi, hi) in v.iter().zip(&p.h) {
            assert!((vi - hi / (2f64.powi(n as i32) * hn)).abs() < 1e-15);
        }
        assert!((s - 2f64.powi(n as i32) * hn).abs() <= 1e-15 * s);
    }
    let rows = rescaling_identity(&f, &adv, &pairs, Criterion::Zygmund).unwrap();
    assert!(rows.iter().all(|r| r.relative_error <= 1e-9));
    assert!(rows.iter().all(|r| r.composite >= r.n as f64));
}

#[test]
fn adversarial_curve_rejects_slow_sequences() {
    let pairs = vec![WitnessPair {
        n: 2,
        x: vec![0.5],
        h: vec![0.01],
        q: 1.0,
        reached_target: true,
    }];
    assert!(adversarial_curve(&[0.0], &pairs, None).is_err());
}

#[test]
fn boman_verdicts_agree_for_a_smooth_and_a_cusped_function() {
    let smooth = boman_test(&BomanConfig::new("tensor(sin, exp)", 0, Criterion::Zygmund, [-1.0, 1.0], 3)).unwrap();
    assert!(smooth.direct.verdict && smooth.all_composites_bounded && smooth.agreement);
    assert!(smooth.adversarial.is_none());
    let mut cfg = BomanConfig::new("tensor(power_abs:alpha=0.5, poly:0,0,1)", 0, Criterion::Zygmund, [-1.0, 1.0], 3);
    cfg.curves = 8;
    let cusp = boman_test(&cfg).unwrap();
    assert!(!cusp.direct.verdict && cusp.agreement && !cusp.expected);
    let adv = cusp.adversarial.as_ref().expect("a failing direct verdict builds an adversarial curve");
    assert!(adv.grows);
    assert_eq!(cusp.to_json().unwrap(), boman_test(&cfg).unwrap().to_json().unwrap());
}
