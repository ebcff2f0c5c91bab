//! Exact stencils, the Zygmund Taylor formula and cusp arithmetic.

use num_rational::{BigRational, Rational64};
use proptest::prelude::*;

use zygmund::corpus::AnalyticFn;
use zygmund::function::Polynomial;
use zygmund::scalar::rational;
use zygmund::stencil::{
    apply_am, apply_bm, apply_dm, cusp_loss, rational_from_decimal, taylor_remainder, Stencil, StencilKind,
    TaylorCoeffs, MAX_STENCIL_ORDER,
};

fn ratio() -> impl Strategy<Value = BigRational> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| rational(n, d))
}

fn step() -> impl Strategy<Value = BigRational> {
    ratio().prop_filter("nonzero", |h| *h != rational(0, 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stencils_are_exact_on_low_degree_polynomials(
        m in 1usize..=8,
        coeffs in prop::collection::vec(ratio(), 9),
        x in ratio(),
        h in step(),
    ) {
        let p = Polynomial::new(coeffs[..=m].to_vec());
        let hp = h.clone() * p.derive().value(&x);
        prop_assert_eq!(apply_am(&p, m, &x, &h).unwrap(), hp.clone());
        prop_assert_eq!(apply_bm(&p, m, &x, &h).unwrap(), hp);
        prop_assert_eq!(taylor_remainder(&p, m, &x, &h).unwrap(), rational(0, 1));
    }
}

fn strings(s: &Stencil) -> Vec<String> {
    s.to_record().coefficients
}

#[test]
fn first_order_stencils() {
    assert_eq!(strings(&Stencil::new(1, StencilKind::Zygmund).unwrap()), ["1", "-1"]);
    assert_eq!(strings(&Stencil::new(1, StencilKind::Holder).unwrap()), ["-1", "1"]);
}

#[test]
fn moments_hold_for_every_order() {
    for m in 1..=MAX_STENCIL_ORDER {
        for kind in [StencilKind::Zygmund, StencilKind::Holder] {
            let s = Stencil::new(m, kind).unwrap();
            assert!(s.moments_hold(), "{kind:?} m={m}");
            if m >= 2 {
                assert_eq!(s.moment(2), rational(0, 1));
            }
        }
    }
    assert!(Stencil::new(0, StencilKind::Zygmund).is_err());
    assert!(Stencil::new(MAX_STENCIL_ORDER + 1, StencilKind::Holder).is_err());
}

#[test]
fn certified_orders_reach_m_plus_point_nine() {
    for m in 1..=4 {
        for kind in [StencilKind::Zygmund, StencilKind::Holder] {
            let s = Stencil::new(m, kind).unwrap();
            let order = s.certified_order.expect("enough scales above the noise floor");
            assert!(order >= m as f64 + 0.9, "{kind:?} m={m}: {order}");
        }
    }
}

#[test]
fn records_round_trip_through_json() {
    let s = Stencil::new(5, StencilKind::Zygmund).unwrap();
    let json = serde_json::to_string(&s.to_record()).unwrap();
    let back = Stencil::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn dm_hand_values() {
    let x = |t: f64| t;
    assert_eq!(apply_dm(&x, 1, &0.0, &1.0).unwrap(), -1.0);
    let one = |_: f64| 1.0;
    assert_eq!(apply_dm(&one, 0, &0.3, &0.1).unwrap(), -1.0);
}

#[test]
fn holder_stencil_on_a_square() {
    let sq = |t: f64| t * t;
    let err = 0.1 * 2.0 - apply_bm(&sq, 1, &1.0, &0.1).unwrap();
    assert!((err + 0.01).abs() < 1e-15);
}

#[test]
fn taylor_weights() {
    let w = TaylorCoeffs::new(0).weights;
    assert_eq!(w, vec![rational(1, 1)]);
    let w = TaylorCoeffs::new(3).weights;
    assert_eq!(w, vec![rational(15, 8), rational(7, 4), rational(3, 2), rational(1, 1)]);
}

#[test]
fn taylor_remainder_order_on_sine() {
    let sin: AnalyticFn = "sin".parse().unwrap();
    let steps: Vec<f64> = (4..=12).map(|k| 2f64.powi(-k)).collect();
    let errors: Vec<f64> = steps.iter().map(|h| taylor_remainder(&sin, 2, &0.5, h).unwrap()).collect();
    let fit = zygmund::fit::fit_order(&steps, &errors).unwrap();
    assert!(fit.slope >= 2.9, "{}", fit.slope);
    assert!(taylor_remainder(&|t: f64| t, 1, &0.0, &0.5).is_err());
}

#[test]
fn cusp_loss_examples() {
    let r = cusp_loss(1, Rational64::new(1, 1), Rational64::new(1, 1)).unwrap();
    assert_eq!((r.required_order, r.output_exponent.as_str()), (2, "1/2"));
    let r = cusp_loss(1, Rational64::new(1, 2), Rational64::new(1, 1)).unwrap();
    assert_eq!((r.required_order, r.output_exponent.as_str()), (4, "1/8"));
    let r = cusp_loss(3, Rational64::new(2, 3), Rational64::new(1, 2)).unwrap();
    assert_eq!((r.required_order, r.output_exponent.as_str()), (9, "1/12"));
    assert!(cusp_loss(0, Rational64::new(1, 2), Rational64::new(1, 2)).is_err());
    assert!(cusp_loss(1, Rational64::new(3, 2), Rational64::new(1, 2)).is_err());
}

#[test]
fn decimals_become_small_rationals() {
    assert_eq!(rational_from_decimal(0.5).unwrap(), Rational64::new(1, 2));
    assert_eq!(rational_from_decimal(2.0 / 3.0).unwrap(), Rational64::new(2, 3));
    assert_eq!(rational_from_decimal(-0.125).unwrap(), Rational64::new(-1, 8));
    assert!(rational_from_decimal(f64::NAN).is_err());
}
