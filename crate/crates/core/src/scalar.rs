//! Scalar backends for the difference calculus.
//!
//! Every identity in [`crate::finitediff`] and [`crate::stencil`] is generic over
//! [`Field`], so the same code runs in binary64 and in exact rational arithmetic.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// An ordered field usable as an evaluation backend.
pub trait Field: Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> {
    fn from_i64(n: i64) -> Self;
    fn abs_val(&self) -> Self;
    /// Lossy magnitude used for tolerance scaling and step-size dispatch.
    fn to_f64_lossy(&self) -> f64;
    /// Whether arithmetic in this backend is exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Conversion from an exact rational (rounded in inexact backends).
    fn from_rational(r: &BigRational) -> Self;

    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn powi(&self, k: u32) -> Self {
        f64::powi(*self, k as i32)
    }
}

impl Field for BigRational {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Binomial coefficient as an exact integer (small arguments only).
pub fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

pub fn factorial_exact<T: Field>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::from_i64(i as i64))
}

/// Renders a rational as `"p/q"` (or `"p"` for integers).
pub fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"` or `"p"` into a rational.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Exact rational from a finite `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn ratio_round_trip() {
        let r = rational(-6, 14);
        assert_eq!(ratio_string(&r), "-3/7");
        assert_eq!(parse_ratio("-3/7").unwrap(), r);
        assert_eq!(parse_ratio("5").unwrap(), rational(5, 1));
        assert!(parse_ratio("1/0").is_none());
    }
}
