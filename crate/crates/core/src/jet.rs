//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] of order `n` stores `f(x), f'(x)/1!, …, f^(n)(x)/n!`. Arithmetic on
//! jets applies the product and chain rules exactly, which is how the smooth
//! bump profiles and curve blends expose their derivatives.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::factorial;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The identity function expanded at `x`.
    pub fn variable(x: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = x;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self { coeffs }
    }

    pub fn from_derivatives(derivs: &[f64]) -> Self {
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(k, d)| d / factorial(k))
            .collect();
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `k`-th derivative of the expanded function.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeffs.get(k).map_or(0.0, |c| c * factorial(k))
    }

    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|k| self.derivative(k)).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut out = vec![0.0; n + 1];
        out[0] = self.coeffs[0].exp();
        // y' = a' y  =>  k y_k = sum_{j=1..k} j a_j y_{k-j}
        for k in 1..=n {
            let s: f64 = (1..=k)
                .map(|j| j as f64 * self.coeffs[j] * out[k - j])
                .sum();
            out[k] = s / k as f64;
        }
        Self { coeffs: out }
    }

    pub fn recip(&self) -> Self {
        let n = self.order();
        let a0 = self.coeffs[0];
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0 / a0;
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * out[k - j]).sum();
            out[k] = -s / a0;
        }
        Self { coeffs: out }
    }

    pub fn div(&self, other: &Self) -> Self {
        self * &other.recip()
    }

    /// Composition `f ∘ self` where `outer` holds `f, f', …` at `self.value()`.
    pub fn compose(&self, outer: &[f64]) -> Self {
        let n = self.order();
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut out = Jet::constant(0.0, n);
        let mut power = Jet::constant(1.0, n);
        for (k, d) in outer.iter().enumerate().take(n + 1) {
            out = &out + &power.scale(d / factorial(k));
            power = &power * &delta;
        }
        out
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum())
            .collect();
        Jet { coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// `exp(-1/u)` for `u > 0`, identically zero (with all derivatives) for `u <= 0`.
pub fn flat_exp(u: &Jet) -> Jet {
    if u.value() <= 0.0 {
        Jet::constant(0.0, u.order())
    } else {
        (-&u.recip()).exp()
    }
}

/// C^∞ step rising from 0 (at `u <= 0`) to 1 (at `u >= 1`), flat to all orders at both ends.
pub fn smooth_step(u: &Jet) -> Jet {
    let n = u.order();
    if u.value() <= 0.0 {
        return Jet::constant(0.0, n);
    }
    if u.value() >= 1.0 {
        return Jet::constant(1.0, n);
    }
    let a = flat_exp(u);
    let b = flat_exp(&(-u).add_const(1.0));
    a.div(&(&a + &b))
}

/// Bump profile `exp(-1/(1-u²))` on `|u| < 1`, zero elsewhere.
pub fn bump(u: &Jet) -> Jet {
    let n = u.order();
    if u.value().abs() >= 1.0 {
        return Jet::constant(0.0, n);
    }
    let w = (-&(u * u)).add_const(1.0);
    (-&w.recip()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_sin_like_jet() {
        // d/dx exp(x^2) at x = 0.5 is 2x exp(x^2)
        let x = Jet::variable(0.5, 3);
        let y = (&x * &x).exp();
        let e = 0.25f64.exp();
        assert!((y.derivative(1) - e).abs() < 1e-14);
        assert!((y.derivative(2) - (2.0 + 1.0) * e).abs() < 1e-13);
    }

    #[test]
    fn recip_matches_closed_form() {
        let x = Jet::variable(2.0, 4);
        let r = x.recip();
        // (1/x)^{(k)} = (-1)^k k! / x^{k+1}
        for k in 0..=4 {
            let expected = (-1f64).powi(k as i32) * factorial(k) / 2f64.powi(k as i32 + 1);
            assert!((r.derivative(k) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn compose_with_sin() {
        let x = Jet::variable(0.3, 4);
        let inner = &x * &x;
        let v = inner.value();
        let outer = [v.sin(), v.cos(), -v.sin(), -v.cos(), v.sin()];
        let y = inner.compose(&outer);
        // (sin x^2)' = 2x cos x^2
        assert!((y.derivative(1) - 0.6 * v.cos()).abs() < 1e-14);
    }

    #[test]
    fn smooth_step_is_partition_of_unity() {
        for i in 1..10 {
            let u = i as f64 / 10.0;
            let s = smooth_step(&Jet::variable(u, 2)).value();
            let t = smooth_step(&Jet::variable(1.0 - u, 2)).value();
            assert!((s + t - 1.0).abs() < 1e-15);
        }
        assert_eq!(smooth_step(&Jet::variable(0.0, 4)).derivatives(), vec![0.0; 5]);
        assert_eq!(smooth_step(&Jet::variable(1.0, 4)).derivative(0), 1.0);
    }
}
