//! Function abstractions shared by the difference calculus and the corpus.

use crate::error::{Error, Result};
use crate::scalar::Field;

/// A scalar function of one variable that can be evaluated in the backend `T`,
/// optionally with an exact derivative oracle.
///
/// Closures `Fn(T) -> T` implement this trait (total, no derivatives).
pub trait ScalarFn<T = f64> {
    fn eval(&self, x: &T) -> Result<T>;

    /// Exact `order`-th derivative at `x`. Order 0 is the value itself.
    fn derivative(&self, order: usize, x: &T) -> Result<T> {
        if order == 0 {
            self.eval(x)
        } else {
            Err(Error::MissingDerivative {
                order,
                available: self.derivative_budget().unwrap_or(usize::MAX),
            })
        }
    }

    /// Highest derivative order the oracle provides; `None` means unlimited.
    fn derivative_budget(&self) -> Option<usize> {
        Some(0)
    }
}

impl<T: Clone, F: Fn(T) -> T> ScalarFn<T> for F {
    fn eval(&self, x: &T) -> Result<T> {
        Ok(self(x.clone()))
    }
}

/// Polynomial with coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    pub coeffs: Vec<T>,
}

impl<T: Field> Polynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn value(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derive(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * T::from_i64(k as i64))
            .collect();
        Self { coeffs }
    }

    /// Antiderivative vanishing at 0.
    pub fn integrate(&self) -> Self {
        let mut coeffs = vec![T::zero()];
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.clone() / T::from_i64(k as i64 + 1)),
        );
        Self { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self { coeffs: vec![] };
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self { coeffs }
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derive())
    }
}

impl<T: Field> ScalarFn<T> for Polynomial<T> {
    fn eval(&self, x: &T) -> Result<T> {
        Ok(self.value(x))
    }
    fn derivative(&self, order: usize, x: &T) -> Result<T> {
        Ok(self.nth_derivative(order).value(x))
    }
    fn derivative_budget(&self) -> Option<usize> {
        None
    }
}

type BoxedFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A binary64 function paired with closures for its derivatives.
pub struct Differentiable {
    derivatives: Vec<BoxedFn>,
}

impl Differentiable {
    /// `derivatives[0]` is the function, `derivatives[k]` its `k`-th derivative.
    pub fn new(derivatives: Vec<BoxedFn>) -> Self {
        assert!(!derivatives.is_empty(), "at least the function itself is required");
        Self { derivatives }
    }
}

impl ScalarFn<f64> for Differentiable {
    fn eval(&self, x: &f64) -> Result<f64> {
        Ok((self.derivatives[0])(*x))
    }
    fn derivative(&self, order: usize, x: &f64) -> Result<f64> {
        self.derivatives
            .get(order)
            .map(|d| d(*x))
            .ok_or(Error::MissingDerivative {
                order,
                available: self.derivatives.len() - 1,
            })
    }
    fn derivative_budget(&self) -> Option<usize> {
        Some(self.derivatives.len() - 1)
    }
}

/// Restricts a function to a closed interval; evaluation outside is a domain error.
pub struct Restricted<F> {
    pub inner: F,
    pub lo: f64,
    pub hi: f64,
}

impl<T: Field, F: ScalarFn<T>> ScalarFn<T> for Restricted<F> {
    fn eval(&self, x: &T) -> Result<T> {
        let v = x.to_f64_lossy();
        if v < self.lo || v > self.hi {
            return Err(Error::Domain {
                x: v,
                lo: self.lo,
                hi: self.hi,
            });
        }
        self.inner.eval(x)
    }
    fn derivative(&self, order: usize, x: &T) -> Result<T> {
        self.eval(x)?;
        self.inner.derivative(order, x)
    }
    fn derivative_budget(&self) -> Option<usize> {
        self.inner.derivative_budget()
    }
}
