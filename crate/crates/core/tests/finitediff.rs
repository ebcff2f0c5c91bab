//! Exact difference-calculus identities checked on random rational polynomials.

use num_rational::BigRational;
use proptest::prelude::*;

use zygmund::finitediff::{
    divided_difference, divided_difference_recursive, forward_difference_closed, forward_difference_recursive,
    verify_chain_rule, verify_leibniz, NodeSet,
};
use zygmund::function::{Polynomial, ScalarFn};
use zygmund::identities::run_identity_suite;
use zygmund::scalar::{factorial_exact, rational};

fn ratio() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=8).prop_map(|(n, d)| rational(n, d))
}

fn nonzero_ratio() -> impl Strategy<Value = BigRational> {
    ratio().prop_filter("step must be nonzero", |h| *h != rational(0, 1))
}

fn poly(max_degree: usize) -> impl Strategy<Value = Polynomial<BigRational>> {
    prop::collection::vec(ratio(), 1..=max_degree + 1).prop_map(Polynomial::new)
}

fn distinct_nodes(len: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::btree_set((-40i64..=40, 1i64..=4), len).prop_filter_map("nodes must be distinct", move |pairs| {
        let mut nodes: Vec<BigRational> = pairs.into_iter().map(|(n, d)| rational(n, d)).collect();
        nodes.sort();
        nodes.dedup();
        (nodes.len() == len).then_some(nodes)
    })
}

proptest! {
    #[test]
    fn recursion_matches_closed_form(p in poly(6), x in ratio(), h in nonzero_ratio(), m in 0usize..=8) {
        prop_assert_eq!(
            forward_difference_recursive(&p, &x, &h, m).unwrap(),
            forward_difference_closed(&p, &x, &h, m).unwrap()
        );
    }

    #[test]
    fn differences_annihilate_low_degree(p in poly(4), x in ratio(), h in nonzero_ratio()) {
        let m = p.degree().map_or(1, |d| d + 1);
        prop_assert_eq!(forward_difference_closed(&p, &x, &h, m).unwrap(), rational(0, 1));
    }

    #[test]
    fn top_difference_is_leading_coefficient(p in poly(5), x in ratio(), h in nonzero_ratio()) {
        let Some(d) = p.degree() else { return Ok(()); };
        let delta = forward_difference_closed(&p, &x, &h, d).unwrap();
        let expected = p.coeffs[d].clone() * factorial_exact::<BigRational>(d) * (0..d).fold(rational(1, 1), |a, _| a * h.clone());
        prop_assert_eq!(delta, expected);
    }

    #[test]
    fn divided_differences_are_symmetric(p in poly(6), nodes in distinct_nodes(5), seed in any::<u64>()) {
        let mut shuffled = nodes.clone();
        let n = shuffled.len();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = divided_difference(&p, &NodeSet::new(nodes.clone()).unwrap()).unwrap();
        let b = divided_difference(&p, &NodeSet::new(shuffled).unwrap()).unwrap();
        let c = divided_difference_recursive(&p, &NodeSet::new(nodes).unwrap()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a, c);
    }

    #[test]
    fn leibniz_is_exact(f in poly(4), g in poly(4), k in poly(3), x in ratio(), h in nonzero_ratio(), m in 1usize..=8) {
        let factors: [&dyn ScalarFn<BigRational>; 3] = [&f, &g, &k];
        let r = verify_leibniz(&factors, &x, &h, m).unwrap();
        prop_assert_eq!(r.lhs, r.rhs);
    }

    #[test]
    fn chain_rules_are_exact(f in poly(4), g in poly(3), x in ratio(), h in nonzero_ratio(), order in 1usize..=2) {
        let r = verify_chain_rule(&f, &g, &x, &h, order).unwrap();
        prop_assert_eq!(r.lhs, r.rhs);
    }
}

#[test]
fn duplicate_nodes_are_rejected() {
    assert!(NodeSet::new(vec![rational(1, 2), rational(2, 4)]).is_err());
}

#[test]
fn identity_suite_passes_for_several_seeds() {
    for seed in [0, 7, 2024] {
        let report = run_identity_suite(8, 60, seed).unwrap();
        assert!(report.passed, "seed {seed}: {report:?}");
        assert!(report.rows.iter().all(|r| r.instances == 60));
    }
}

#[test]
fn identity_suite_is_deterministic() {
    let a = run_identity_suite(4, 30, 11).unwrap().to_json().unwrap();
    let b = run_identity_suite(4, 30, 11).unwrap().to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn identity_suite_rejects_orders_out_of_range() {
    assert!(run_identity_suite(0, 10, 1).is_err());
    assert!(run_identity_suite(9, 10, 1).is_err());
}
