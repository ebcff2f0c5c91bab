//! Seeded random checks of the difference-calculus identities, run in exact
//! rational arithmetic and in binary64 side by side.

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finitediff::{
    divided_difference, forward_difference_closed, forward_difference_recursive, verify_chain_rule, verify_leibniz,
    NodeSet, TOL_EXACT,
};
use crate::function::{Polynomial, ScalarFn};
use crate::output::to_canonical_json;
use crate::scalar::{factorial, rational, Field};

pub const MAX_IDENTITY_ORDER: usize = 8;
const MAX_DEGREE: usize = 5;

/// Outcome of one identity over every trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub identity: String,
    pub instances: usize,
    /// Instances whose rational residual was not exactly zero.
    pub exact_failures: usize,
    pub max_float_relative: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub m_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub rows: Vec<IdentityRow>,
    pub passed: bool,
}

impl IdentityReport {
    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(self)
    }
}

fn small_rational(rng: &mut ChaCha8Rng) -> BigRational {
    rational(rng.gen_range(-20..=20), rng.gen_range(1..=8))
}

fn random_poly(rng: &mut ChaCha8Rng) -> Polynomial<BigRational> {
    let degree = rng.gen_range(0..=MAX_DEGREE);
    Polynomial::new((0..=degree).map(|_| small_rational(rng)).collect())
}

fn to_f64(p: &Polynomial<BigRational>) -> Polynomial<f64> {
    Polynomial::new(p.coeffs.iter().map(f64::from_rational).collect())
}

fn nonzero_step(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let h = small_rational(rng);
        if h != rational(0, 1) {
            return h;
        }
    }
}

#[derive(Default)]
struct Tally {
    instances: usize,
    exact_failures: usize,
    max_rel: f64,
}

impl Tally {
    fn record(&mut self, exact_zero: bool, rel: f64) {
        self.instances += 1;
        if !exact_zero {
            self.exact_failures += 1;
        }
        self.max_rel = self.max_rel.max(rel);
    }

    fn row(self, name: &str) -> IdentityRow {
        IdentityRow {
            identity: name.into(),
            instances: self.instances,
            exact_failures: self.exact_failures,
            max_float_relative: self.max_rel,
            passed: self.exact_failures == 0 && self.max_rel <= TOL_EXACT,
        }
    }
}

fn relative(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / scale.max(f64::MIN_POSITIVE)
    }
}

/// Magnitude of the largest term in the expansion of `δ^m`.
fn divided_scale(p: &Polynomial<f64>, nodes: &[f64]) -> f64 {
    let m = nodes.len() - 1;
    nodes
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            let denom: f64 = nodes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, xj)| xi - xj).product();
            (p.value(xi) / denom).abs() * factorial(m)
        })
        .fold(0.0, f64::max)
}

/// Runs Leibniz (two and three factors), both chain rules, recursion versus
/// closed form, and permutation symmetry of `δ^m` on `trials` seeded
/// polynomial instances with orders `1..=m_max`.
pub fn run_identity_suite(m_max: usize, trials: usize, seed: u64) -> Result<IdentityReport> {
    if m_max == 0 || m_max > MAX_IDENTITY_ORDER {
        return Err(Error::ParameterRange(format!("m must lie in 1..={MAX_IDENTITY_ORDER}, got {m_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut leibniz = Tally::default();
    let mut chain1 = Tally::default();
    let mut chain2 = Tally::default();
    let mut recursion = Tally::default();
    let mut symmetry = Tally::default();
    for _ in 0..trials {
        let m = rng.gen_range(1..=m_max);
        let x = small_rational(&mut rng);
        let h = nonzero_step(&mut rng);
        let (xf, hf) = (f64::from_rational(&x), f64::from_rational(&h));
        let n_factors = rng.gen_range(2..=3);
        let polys: Vec<_> = (0..n_factors).map(|_| random_poly(&mut rng)).collect();
        let floats: Vec<_> = polys.iter().map(to_f64).collect();

        let exact: Vec<&dyn ScalarFn<BigRational>> = polys.iter().map(|p| p as &dyn ScalarFn<BigRational>).collect();
        let float: Vec<&dyn ScalarFn<f64>> = floats.iter().map(|p| p as &dyn ScalarFn<f64>).collect();
        let re = verify_leibniz(&exact, &x, &h, m)?;
        let rf = verify_leibniz(&float, &xf, &hf, m)?;
        leibniz.record(re.lhs == re.rhs, rf.relative());

        for (order, tally) in [(1, &mut chain1), (2, &mut chain2)] {
            let re = verify_chain_rule(&polys[0], &polys[1], &x, &h, order)?;
            let rf = verify_chain_rule(&floats[0], &floats[1], &xf, &hf, order)?;
            tally.record(re.lhs == re.rhs, rf.relative());
        }

        let a = forward_difference_closed(&polys[0], &x, &h, m)?;
        let b = forward_difference_recursive(&polys[0], &x, &h, m)?;
        let af = forward_difference_closed(&floats[0], &xf, &hf, m)?;
        let bf = forward_difference_recursive(&floats[0], &xf, &hf, m)?;
        let scale = (0..=m)
            .map(|i| floats[0].value(&(xf + i as f64 * hf)).abs() * crate::scalar::binomial(m, i) as f64)
            .fold(0.0, f64::max);
        recursion.record(a == b, relative(af, bf, scale));

        let mut nodes: Vec<BigRational> = Vec::new();
        while nodes.len() < m + 1 {
            let c = small_rational(&mut rng);
            if !nodes.contains(&c) {
                nodes.push(c);
            }
        }
        let mut shuffled = nodes.clone();
        shuffled.shuffle(&mut rng);
        let d1 = divided_difference(&polys[0], &NodeSet::new(nodes.clone())?)?;
        let d2 = divided_difference(&polys[0], &NodeSet::new(shuffled.clone())?)?;
        let nf: Vec<f64> = nodes.iter().map(f64::from_rational).collect();
        let sf: Vec<f64> = shuffled.iter().map(f64::from_rational).collect();
        let f1 = divided_difference(&floats[0], &NodeSet::new(nf.clone())?)?;
        let f2 = divided_difference(&floats[0], &NodeSet::new(sf)?)?;
        symmetry.record(d1 == d2, relative(f1, f2, divided_scale(&floats[0], &nf)));
    }
    let rows = vec![
        leibniz.row("leibniz"),
        chain1.row("chain_rule_1"),
        chain2.row("chain_rule_2"),
        recursion.row("recursion_vs_closed_form"),
        symmetry.row("divided_difference_symmetry"),
    ];
    let passed = rows.iter().all(|r| r.passed);
    Ok(IdentityReport {
        m_max,
        trials,
        seed,
        tolerance: TOL_EXACT,
        rows,
        passed,
    })
}
