//! Finite differences, difference quotients, and the product/chain/integral
//! identities they satisfy.
//!
//! All operations are generic over [`Field`]: with `BigRational` the identities
//! hold exactly, with `f64` they hold up to [`TOL_EXACT`] relative to the
//! largest term of the expanded sum.

use crate::error::{Error, Result};
use crate::function::ScalarFn;
use crate::quadrature;
use crate::scalar::{binomial, factorial_exact, Field};

/// Relative tolerance for floating-point identity residuals.
pub const TOL_EXACT: f64 = 1e-12;
/// Absolute tolerance for quadrature-based identities.
pub const TOL_QUAD: f64 = 1e-10;
/// Below this step size `forward_difference` switches to pairwise differencing.
pub const RECURSIVE_STEP_THRESHOLD: f64 = 1.0 / 1_048_576.0;

/// Order, step and base point of an equidistant difference.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffRequest<T> {
    pub order: usize,
    pub step: T,
    pub base: T,
}

impl<T: Field> DiffRequest<T> {
    pub fn new(order: usize, step: T, base: T) -> Result<Self> {
        if step.is_zero() {
            return Err(Error::ZeroStep);
        }
        Ok(Self { order, step, base })
    }

    pub fn quotient<F: ScalarFn<T> + ?Sized>(&self, f: &F) -> Result<T> {
        equidistant_quotient(f, &self.base, &self.step, self.order)
    }
}

/// Pairwise distinct nodes `x_0, …, x_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet<T> {
    nodes: Vec<T>,
}

impl<T: Field> NodeSet<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ParameterRange("node set must be nonempty".into()));
        }
        for i in 0..nodes.len() {
            for j in 0..i {
                if nodes[i] == nodes[j] {
                    return Err(Error::DuplicateNode(format!("{:?}", nodes[i])));
                }
            }
        }
        Ok(Self { nodes })
    }

    /// Nodes `x, x + h, …, x + m h`.
    pub fn equidistant(x: &T, h: &T, m: usize) -> Result<Self> {
        Self::new(shifted_nodes(x, h, m))
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Order `m` of the quotient these nodes define.
    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }
}

fn shifted_nodes<T: Field>(x: &T, h: &T, m: usize) -> Vec<T> {
    (0..=m)
        .map(|i| x.clone() + T::from_i64(i as i64) * h.clone())
        .collect()
}

fn node_values<T: Field, F: ScalarFn<T> + ?Sized>(f: &F, x: &T, h: &T, m: usize) -> Result<Vec<T>> {
    shifted_nodes(x, h, m).iter().map(|y| f.eval(y)).collect()
}

/// Binomial closed form `Σ (-1)^{m-i} C(m,i) f(x + i h)`.
pub fn forward_difference_closed<T: Field, F: ScalarFn<T> + ?Sized>(
    f: &F,
    x: &T,
    h: &T,
    m: usize,
) -> Result<T> {
    let values = node_values(f, x, h, m)?;
    Ok(closed_form_from_values(&values))
}

fn closed_form_from_values<T: Field>(values: &[T]) -> T {
    let m = values.len() - 1;
    values.iter().enumerate().fold(T::zero(), |acc, (i, v)| {
        let c = T::from_i64(binomial(m, i));
        if (m - i).is_multiple_of(2) {
            acc + c * v.clone()
        } else {
            acc - c * v.clone()
        }
    })
}

/// Recursive form `Δ^m_h = Δ^1_h ∘ Δ^{m-1}_h`, computed by pairwise differencing.
pub fn forward_difference_recursive<T: Field, F: ScalarFn<T> + ?Sized>(
    f: &F,
    x: &T,
    h: &T,
    m: usize,
) -> Result<T> {
    let values = node_values(f, x, h, m)?;
    Ok(recursive_from_values(values))
}

fn recursive_from_values<T: Field>(mut values: Vec<T>) -> T {
    while values.len() > 1 {
        values = values
            .windows(2)
            .map(|w| w[1].clone() - w[0].clone())
            .collect();
    }
    values.pop().expect("nonempty")
}

/// Forward difference `Δ^m_h f(x)`.
///
/// Uses pairwise differencing when `|h| < 2^-20` and the binomial closed form
/// otherwise; both paths are public for cross-checking.
pub fn forward_difference<T: Field, F: ScalarFn<T> + ?Sized>(
    f: &F,
    x: &T,
    h: &T,
    m: usize,
) -> Result<T> {
    if h.to_f64_lossy().abs() < RECURSIVE_STEP_THRESHOLD {
        forward_difference_recursive(f, x, h, m)
    } else {
        forward_difference_closed(f, x, h, m)
    }
}

/// Difference quotient `δ^m f(x_0, …, x_m) = m! Σ f(x_i) Π_{j≠i} 1/(x_i - x_j)`.
///
/// This is `m!` times the classical divided difference.
pub fn divided_difference<T: Field, F: ScalarFn<T> + ?Sized>(f: &F, nodes: &NodeSet<T>) -> Result<T> {
    let xs = nodes.nodes();
    let m = nodes.order();
    let mut acc = T::zero();
    for (i, xi) in xs.iter().enumerate() {
        let denom = xs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(T::one(), |p, (_, xj)| p * (xi.clone() - xj.clone()));
        acc = acc + f.eval(xi)? / denom;
    }
    Ok(acc * factorial_exact::<T>(m))
}

/// The defining recursion
/// `δ^m f(x_0..x_m) = m (δ^{m-1} f(x_0..x_{m-1}) - δ^{m-1} f(x_1..x_m)) / (x_0 - x_m)`.
pub fn divided_difference_recursive<T: Field, F: ScalarFn<T> + ?Sized>(
    f: &F,
    nodes: &NodeSet<T>,
) -> Result<T> {
    let xs = nodes.nodes();
    let mut table: Vec<T> = xs.iter().map(|x| f.eval(x)).collect::<Result<_>>()?;
    for k in 1..xs.len() {
        table = (0..table.len() - 1)
            .map(|i| {
                T::from_i64(k as i64) * (table[i].clone() - table[i + 1].clone())
                    / (xs[i].clone() - xs[i + k].clone())
            })
            .collect();
    }
    Ok(table.pop().expect("nonempty"))
}

/// Equidistant difference quotient `δ^m_eq f(x; h) = Δ^m_h f(x) / h^m`.
pub fn equidistant_quotient<T: Field, F: ScalarFn<T> + ?Sized>(
    f: &F,
    x: &T,
    h: &T,
    m: usize,
) -> Result<T> {
    if h.is_zero() {
        return Err(Error::ZeroStep);
    }
    if m == 0 {
        return f.eval(x);
    }
    Ok(forward_difference(f, x, h, m)? / h.powi(m as u32))
}

/// Both sides of an identity together with the magnitude of its largest term.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual<T> {
    pub lhs: T,
    pub rhs: T,
    pub scale: f64,
}

impl<T: Field> Residual<T> {
    pub fn abs(&self) -> T {
        (self.lhs.clone() - self.rhs.clone()).abs_val()
    }

    /// `|lhs - rhs|` divided by the largest term magnitude (0 when exact).
    pub fn relative(&self) -> f64 {
        let a = self.abs();
        if a.is_zero() {
            0.0
        } else {
            a.to_f64_lossy() / self.scale.max(f64::MIN_POSITIVE)
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.relative() <= tol
    }
}

/// All `(i_1, …, i_n)` with nonnegative entries summing to `m`.
pub fn weak_compositions(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn rec(rem: usize, slots: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            current.push(rem);
            out.push(current.clone());
            current.pop();
            return;
        }
        for i in 0..=rem {
            current.push(i);
            rec(rem - i, slots - 1, current, out);
            current.pop();
        }
    }
    if n > 0 {
        rec(m, n, &mut current, &mut out);
    }
    out
}

fn multinomial<T: Field>(m: usize, parts: &[usize]) -> T {
    let mut rest = m;
    let mut acc = T::one();
    for &p in parts {
        acc = acc * T::from_i64(binomial(rest, p));
        rest -= p;
    }
    acc
}

/// Residual of the product rule
/// `Δ^m_h (f_1⋯f_n)(x) = Σ C(m; i_1..i_n) Π_j Δ^{i_j}_h f_j(x + (m - Σ_{k≥j} i_k) h)`.
pub fn verify_leibniz<T: Field>(
    factors: &[&dyn ScalarFn<T>],
    x: &T,
    h: &T,
    m: usize,
) -> Result<Residual<T>> {
    if factors.is_empty() {
        return Err(Error::ParameterRange("at least one factor is required".into()));
    }
    let product = |y: &T| -> Result<T> {
        factors
            .iter()
            .try_fold(T::one(), |acc, f| Ok(acc * f.eval(y)?))
    };
    let mut scale = 0.0f64;
    let mut product_values = Vec::with_capacity(m + 1);
    for y in shifted_nodes(x, h, m) {
        let v = product(&y)?;
        product_values.push(v);
    }
    for (i, v) in product_values.iter().enumerate() {
        scale = scale.max((v.to_f64_lossy() * binomial(m, i) as f64).abs());
    }
    let lhs = if h.to_f64_lossy().abs() < RECURSIVE_STEP_THRESHOLD {
        recursive_from_values(product_values)
    } else {
        closed_form_from_values(&product_values)
    };

    let n = factors.len();
    let mut rhs = T::zero();
    for parts in weak_compositions(m, n) {
        let mut term = multinomial::<T>(m, &parts);
        let mut tail: usize = parts.iter().sum();
        for (j, f) in factors.iter().enumerate() {
            let shift = m - tail;
            let point = x.clone() + T::from_i64(shift as i64) * h.clone();
            term = term * forward_difference(*f, &point, h, parts[j])?;
            tail -= parts[j];
        }
        scale = scale.max(term.to_f64_lossy().abs());
        rhs = rhs + term;
    }
    Ok(Residual { lhs, rhs, scale })
}

/// Residual of the first- or second-order chain rule
/// `Δ¹_h (f∘g)(x) = Δ¹_{Δ¹_h g(x)} f(g(x))` and
/// `Δ²_h (f∘g)(x) = Δ¹_{Δ²_h g(x)} f(2g(x+h) - g(x)) + Δ²_{Δ¹_h g(x)} f(g(x))`.
pub fn verify_chain_rule<T: Field, F, G>(f: &F, g: &G, x: &T, h: &T, order: usize) -> Result<Residual<T>>
where
    F: ScalarFn<T> + ?Sized,
    G: ScalarFn<T> + ?Sized,
{
    if order != 1 && order != 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let g_nodes = node_values(g, x, h, order)?;
    let f_of_g: Vec<T> = g_nodes.iter().map(|y| f.eval(y)).collect::<Result<_>>()?;
    let mut scale = f_of_g
        .iter()
        .enumerate()
        .map(|(i, v)| (v.to_f64_lossy() * binomial(order, i) as f64).abs())
        .fold(0.0, f64::max);
    let lhs = closed_form_from_values(&f_of_g);
    let g0 = g_nodes[0].clone();
    let d1 = g_nodes[1].clone() - g0.clone();
    let rhs = if order == 1 {
        let a = f.eval(&(g0.clone() + d1))?;
        let b = f.eval(&g0)?;
        scale = scale.max(a.to_f64_lossy().abs()).max(b.to_f64_lossy().abs());
        a - b
    } else {
        let d2 = closed_form_from_values(&g_nodes);
        let y = T::from_i64(2) * g_nodes[1].clone() - g0.clone();
        let first = [f.eval(&y)?, f.eval(&(y.clone() + d2))?];
        let second = [
            f.eval(&g0)?,
            f.eval(&(g0.clone() + d1.clone()))?,
            f.eval(&(g0.clone() + T::from_i64(2) * d1))?,
        ];
        for v in first.iter().chain(second.iter()) {
            scale = scale.max(2.0 * v.to_f64_lossy().abs());
        }
        closed_form_from_values(&first) + closed_form_from_values(&second)
    };
    Ok(Residual { lhs, rhs, scale })
}

/// Residual of `Δ²_h f(x) = ∫_x^{x+h} Δ¹_h f'(t) dt` with the integral computed
/// by adaptive quadrature (oriented when `h < 0`). The residual scale is 1, so
/// [`Residual::relative`] is the absolute error.
pub fn verify_integral_identity<F: ScalarFn<f64> + ?Sized>(f: &F, x: f64, h: f64) -> Result<Residual<f64>> {
    if h == 0.0 {
        return Err(Error::ZeroStep);
    }
    f.derivative(1, &x)?;
    let lhs = forward_difference_closed(f, &x, &h, 2)?;
    let integrand = |t: f64| {
        let a = f.derivative(1, &(t + h)).unwrap_or(f64::NAN);
        let b = f.derivative(1, &t).unwrap_or(f64::NAN);
        a - b
    };
    let rhs = quadrature::integrate(integrand, x, x + h, 1e-14);
    Ok(Residual { lhs, rhs, scale: 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{Differentiable, Polynomial, Restricted};
    use crate::scalar::rational;
    use num_rational::BigRational;

    #[test]
    fn constants_are_annihilated() {
        let f = |_x: f64| 7.0;
        assert_eq!(forward_difference(&f, &0.4, &0.3, 3).unwrap(), 0.0);
    }

    #[test]
    fn square_second_difference() {
        let f = |x: f64| x * x;
        let d = forward_difference(&f, &0.3, &0.1, 2).unwrap();
        assert!((d - 0.02).abs() < 1e-15);
    }

    #[test]
    fn order_zero_is_evaluation() {
        let f = |x: f64| x.sin();
        assert_eq!(equidistant_quotient(&f, &0.3, &0.1, 0).unwrap(), 0.3f64.sin());
        assert_eq!(forward_difference(&f, &0.3, &0.1, 0).unwrap(), 0.3f64.sin());
    }

    #[test]
    fn cubic_quotient() {
        let f = Polynomial::new(vec![rational(2, 1), rational(-1, 3), rational(5, 1), rational(1, 1)]);
        let q = equidistant_quotient(&f, &rational(3, 7), &rational(-2, 9), 3).unwrap();
        assert_eq!(q, rational(6, 1));
    }

    #[test]
    fn sqrt_abs_quotient_unbounded() {
        let f = |x: f64| x.abs().sqrt();
        for k in 1..8 {
            let h = 2f64.powi(-2 * k);
            let q = equidistant_quotient(&f, &0.0, &h, 1).unwrap();
            assert_eq!(q, 2f64.powi(k));
        }
    }

    #[test]
    fn zero_step_rejected() {
        let f = |x: f64| x;
        assert_eq!(equidistant_quotient(&f, &0.0, &0.0, 1), Err(Error::ZeroStep));
        assert_eq!(DiffRequest::new(2, 0.0, 1.0), Err(Error::ZeroStep));
    }

    #[test]
    fn domain_errors_propagate() {
        let f = Restricted {
            inner: |x: f64| x.ln(),
            lo: 0.5,
            hi: 2.0,
        };
        assert!(matches!(forward_difference(&f, &1.0, &0.5, 3), Err(Error::Domain { .. })));
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(matches!(
            NodeSet::new(vec![0.0, 1.0, 0.0]),
            Err(Error::DuplicateNode(_))
        ));
    }

    #[test]
    fn monomial_divided_difference_is_factorial() {
        let nodes = NodeSet::new(vec![rational(1, 2), rational(-3, 1), rational(5, 7), rational(2, 1)]).unwrap();
        let cube = Polynomial::new(vec![rational(0, 1), rational(0, 1), rational(0, 1), rational(1, 1)]);
        assert_eq!(divided_difference(&cube, &nodes).unwrap(), rational(6, 1));
        let quad = Polynomial::new(vec![rational(4, 1), rational(0, 1), rational(-9, 2)]);
        assert_eq!(divided_difference(&quad, &nodes).unwrap(), rational(0, 1));
        assert_eq!(
            divided_difference_recursive(&cube, &nodes).unwrap(),
            rational(6, 1)
        );
    }

    #[test]
    fn leibniz_trivial_cases() {
        let id = |x: f64| x;
        let r = verify_leibniz(&[&id, &id], &1.0, &0.5, 2).unwrap();
        assert!(r.within(TOL_EXACT));
        let s = |x: f64| x.sin();
        let r = verify_leibniz(&[&s], &0.2, &0.01, 3).unwrap();
        assert_eq!(r.lhs, r.rhs);
    }

    #[test]
    fn leibniz_sin_cos() {
        let s = |x: f64| x.sin();
        let c = |x: f64| x.cos();
        let r = verify_leibniz(&[&s, &c], &0.2, &0.01, 3).unwrap();
        assert!(r.within(TOL_EXACT), "{}", r.relative());
    }

    #[test]
    fn chain_rule_cases() {
        let id = |x: f64| x;
        let sq = |u: f64| u * u;
        let g = |x: f64| x.sin();
        let konst = |_x: f64| 0.8;
        for order in 1..=2 {
            assert!(verify_chain_rule(&id, &g, &0.7, &0.05, order).unwrap().within(TOL_EXACT));
            assert!(verify_chain_rule(&sq, &g, &0.7, &0.05, order).unwrap().within(TOL_EXACT));
            let r = verify_chain_rule(&sq, &konst, &0.7, &0.05, order).unwrap();
            assert_eq!(r.abs(), 0.0);
        }
        assert_eq!(
            verify_chain_rule(&sq, &g, &0.7, &0.05, 3),
            Err(Error::UnsupportedOrder(3))
        );
    }

    #[test]
    fn chain_rule_exact_for_rational_polynomials() {
        let f = Polynomial::new(vec![rational(1, 2), rational(-3, 1), rational(0, 1), rational(2, 5)]);
        let g = Polynomial::new(vec![rational(0, 1), rational(7, 3), rational(-1, 4)]);
        for order in 1..=2 {
            let r: Residual<BigRational> =
                verify_chain_rule(&f, &g, &rational(2, 3), &rational(-5, 11), order).unwrap();
            assert_eq!(r.lhs, r.rhs);
        }
    }

    #[test]
    fn integral_identity() {
        let sq = Polynomial::new(vec![0.0, 0.0, 1.0]);
        let r = verify_integral_identity(&sq, 0.0, 1.0).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-15 && (r.rhs - 2.0).abs() < 1e-13);

        let sin = Differentiable::new(vec![Box::new(f64::sin), Box::new(f64::cos)]);
        let r = verify_integral_identity(&sin, 0.3, 0.2).unwrap();
        let closed = 2.0 * (0.5f64).sin() * (0.2f64.cos() - 1.0);
        assert!((r.lhs - closed).abs() < 1e-15);
        assert!(r.relative() <= TOL_QUAD);

        let cube = Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]);
        let r = verify_integral_identity(&cube, 0.4, -0.3).unwrap();
        assert!(r.relative() <= TOL_QUAD);
        // Δ²_h x³ = 6h²(x + h)
        assert!((r.lhs - 6.0 * 0.09 * 0.1).abs() < 1e-15);
        assert!((r.rhs - r.lhs).abs() <= TOL_QUAD);
    }

    #[test]
    fn integral_identity_needs_derivative() {
        let f = |x: f64| x * x;
        assert!(matches!(
            verify_integral_identity(&f, 0.0, 1.0),
            Err(Error::MissingDerivative { .. })
        ));
    }
}
