//! Derivative-approximating stencils built from exact Vandermonde solves.
//!
//! `D_m(f)(x;h) = 2^-m f(x+2h) - 2 f(x+h)` combines with the Taylor weights
//! `2 - 2^-(m-j)` into a remainder of order `h^{m+1}` for functions whose
//! `m`-th derivative is Zygmund. A Zygmund stencil `a_0..a_m` turns the
//! values `D_m(f)(x; jh)` into `h f'(x)`; a Hölder stencil `b_0..b_m` does the
//! same with plain samples `f(x + jh)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{dyadic_steps, fit_order};
use crate::function::ScalarFn;
use crate::scalar::{factorial_exact, parse_ratio, ratio_string, Field};

pub const MAX_STENCIL_ORDER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StencilKind {
    /// Weights for `D_m(f)(x; jh)`.
    Zygmund,
    /// Weights for `f(x + jh)`.
    Holder,
}

impl std::str::FromStr for StencilKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zygmund" => Ok(Self::Zygmund),
            "holder" => Ok(Self::Holder),
            other => Err(Error::ParameterRange(format!("unknown stencil kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub order: usize,
    pub kind: StencilKind,
    pub coefficients: Vec<BigRational>,
    /// Empirical error exponent on the calibration function, if enough scales
    /// sit above the noise floor.
    pub certified_order: Option<f64>,
}

/// JSON form: `{m, kind, coefficients: ["p/q", …], certified_order}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilRecord {
    pub m: usize,
    pub kind: StencilKind,
    pub coefficients: Vec<String>,
    pub certified_order: Option<f64>,
}

/// Right-hand side of the first-moment equation.
pub fn first_moment(m: usize, kind: StencilKind) -> BigRational {
    match kind {
        StencilKind::Holder => BigRational::one(),
        StencilKind::Zygmund => {
            // (1/2^{m-1} - 2)^{-1} = 2^{m-1} / (1 - 2^m)
            let two = BigRational::from_integer(BigInt::from(2));
            let inv = (0..m).fold(BigRational::one(), |acc, _| acc / two.clone()) * two.clone();
            (inv - two).recip()
        }
    }
}

impl Stencil {
    /// Solves the `(m+1)×(m+1)` moment system exactly and certifies the
    /// resulting error order on `sin` at `x = 0.5`.
    pub fn new(m: usize, kind: StencilKind) -> Result<Self> {
        if m == 0 || m > MAX_STENCIL_ORDER {
            return Err(Error::ParameterRange(format!(
                "stencil order must be in 1..={MAX_STENCIL_ORDER}, got {m}"
            )));
        }
        let matrix: Vec<Vec<BigInt>> = (0..=m)
            .map(|i| (0..=m).map(|j| BigInt::from(j).pow(i as u32)).collect())
            .collect();
        let mut rhs = vec![BigRational::zero(); m + 1];
        rhs[1] = first_moment(m, kind);
        let coefficients = solve_fraction_free(matrix, rhs)?;
        let mut stencil = Self {
            order: m,
            kind,
            coefficients,
            certified_order: None,
        };
        stencil.certified_order = stencil.calibrate();
        Ok(stencil)
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// `Σ_j c_j j^i`.
    pub fn moment(&self, i: u32) -> BigRational {
        self.coefficients
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (j, c)| {
                acc + c.clone() * BigRational::from_integer(BigInt::from(j).pow(i))
            })
    }

    /// Whether every moment condition holds exactly.
    pub fn moments_hold(&self) -> bool {
        (0..=self.order as u32).all(|i| {
            let expected = if i == 1 {
                first_moment(self.order, self.kind)
            } else {
                BigRational::zero()
            };
            self.moment(i) == expected
        })
    }

    /// Applies the stencil: `A_m(f)(x;h)` for Zygmund, `Σ b_j f(x+jh)` for Hölder.
    pub fn apply<T: Field, F: ScalarFn<T> + ?Sized>(&self, f: &F, x: &T, h: &T) -> Result<T> {
        let mut acc = T::zero();
        for (j, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let jh = T::from_i64(j as i64) * h.clone();
            let term = match self.kind {
                StencilKind::Zygmund => apply_dm(f, self.order, x, &jh)?,
                StencilKind::Holder => f.eval(&(x.clone() + jh))?,
            };
            acc = acc + T::from_rational(c) * term;
        }
        Ok(acc)
    }

    /// `h f'(x) - apply(f, x, h)`.
    pub fn error<T: Field, F: ScalarFn<T> + ?Sized>(&self, f: &F, x: &T, h: &T) -> Result<T> {
        Ok(h.clone() * f.derivative(1, x)? - self.apply(f, x, h)?)
    }

    /// Fitted error slope on `sin` at `x = 0.5`. Dyadic steps `2^-12..2^-4`
    /// are used first; coarser steps (down to `2^-1`) are added only when
    /// fewer than three errors clear the noise floor.
    fn calibrate(&self) -> Option<f64> {
        let sin = crate::function::Differentiable::new(vec![Box::new(f64::sin), Box::new(f64::cos)]);
        for lo in [4, 3, 2, 1] {
            let steps = dyadic_steps(lo, 12);
            let errors: Vec<f64> = steps
                .iter()
                .map(|h| self.error(&sin, &0.5, h).unwrap_or(f64::NAN))
                .collect();
            if let Some(fit) = fit_order(&steps, &errors) {
                if fit.points >= 3 {
                    return Some(fit.slope);
                }
            }
        }
        None
    }

    pub fn to_record(&self) -> StencilRecord {
        StencilRecord {
            m: self.order,
            kind: self.kind,
            coefficients: self.coefficients.iter().map(ratio_string).collect(),
            certified_order: self.certified_order,
        }
    }

    pub fn from_record(record: &StencilRecord) -> Result<Self> {
        let coefficients = record
            .coefficients
            .iter()
            .map(|s| parse_ratio(s).ok_or_else(|| Error::ParameterRange(format!("bad rational `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        if coefficients.len() != record.m + 1 {
            return Err(Error::Dimension(format!(
                "{} coefficients for order {}",
                coefficients.len(),
                record.m
            )));
        }
        Ok(Self {
            order: record.m,
            kind: record.kind,
            coefficients,
            certified_order: record.certified_order,
        })
    }
}

type StencilCache = Mutex<HashMap<(usize, StencilKind), Arc<Stencil>>>;

/// Process-wide stencil cache; entries are immutable once built.
pub fn cached_stencil(m: usize, kind: StencilKind) -> Result<Arc<Stencil>> {
    static CACHE: OnceLock<StencilCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(s) = cache.lock().expect("stencil cache poisoned").get(&(m, kind)) {
        return Ok(s.clone());
    }
    let built = Arc::new(Stencil::new(m, kind)?);
    let mut guard = cache.lock().expect("stencil cache poisoned");
    Ok(guard.entry((m, kind)).or_insert(built).clone())
}

/// Solves `A x = b` for an integer matrix and rational right-hand side using
/// Bareiss fraction-free elimination followed by exact back substitution.
pub fn solve_fraction_free(mut a: Vec<Vec<BigInt>>, b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("system must be square".into()));
    }
    // clear denominators of b
    let den = b
        .iter()
        .fold(BigInt::one(), |acc, r| num_integer::lcm(acc, r.denom().clone()));
    let mut rhs: Vec<BigInt> = b
        .iter()
        .map(|r| r.numer() * (&den / r.denom()))
        .collect();

    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot_row = (k..n).find(|&r| !a[r][k].is_zero()).ok_or(Error::Singular)?;
        if pivot_row != k {
            a.swap(k, pivot_row);
            rhs.swap(k, pivot_row);
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
            rhs[i] = (&rhs[i] * &a[k][k] - &a[i][k] * &rhs[k]) / &prev;
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }

    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from_integer(rhs[i].clone());
        for j in i + 1..n {
            acc -= BigRational::from_integer(a[i][j].clone()) * x[j].clone();
        }
        x[i] = acc / BigRational::from_integer(a[i][i].clone());
    }
    let den = BigRational::from_integer(den);
    Ok(x.into_iter().map(|v| v / den.clone()).collect())
}

/// `D_m(f)(x;h) = f(x+2h)/2^m - 2 f(x+h)`.
pub fn apply_dm<T: Field, F: ScalarFn<T> + ?Sized>(f: &F, m: usize, x: &T, h: &T) -> Result<T> {
    let two = T::from_i64(2);
    let far = f.eval(&(x.clone() + two.clone() * h.clone()))?;
    let near = f.eval(&(x.clone() + h.clone()))?;
    Ok(far / two.powi(m as u32) - two * near)
}

/// `A_m(f)(x;h) = Σ a_j D_m(f)(x; jh)` with the cached Zygmund stencil.
pub fn apply_am<T: Field, F: ScalarFn<T> + ?Sized>(f: &F, m: usize, x: &T, h: &T) -> Result<T> {
    cached_stencil(m, StencilKind::Zygmund)?.apply(f, x, h)
}

/// `Σ b_j f(x + jh)` with the cached Hölder stencil.
pub fn apply_bm<T: Field, F: ScalarFn<T> + ?Sized>(f: &F, m: usize, x: &T, h: &T) -> Result<T> {
    cached_stencil(m, StencilKind::Holder)?.apply(f, x, h)
}

/// Weights `w_j = 2 - 2^{-(m-j)}`, `j = 0..=m`, of the Zygmund–Taylor formula.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoeffs {
    pub order: usize,
    pub weights: Vec<BigRational>,
}

impl TaylorCoeffs {
    pub fn new(m: usize) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        let weights = (0..=m)
            .map(|j| {
                let pow = (0..m - j).fold(BigRational::one(), |acc, _| acc * two.clone());
                two.clone() - pow.recip()
            })
            .collect();
        Self { order: m, weights }
    }
}

/// `2^-m f(x+2h) - 2 f(x+h) + Σ_{j≤m} (2 - 2^{-(m-j)}) f^{(j)}(x) h^j / j!`.
pub fn taylor_remainder<T: Field, F: ScalarFn<T> + ?Sized>(f: &F, m: usize, x: &T, h: &T) -> Result<T> {
    let weights = TaylorCoeffs::new(m).weights;
    let mut acc = apply_dm(f, m, x, h)?;
    let mut hpow = T::one();
    for (j, w) in weights.iter().enumerate() {
        let d = f.derivative(j, x)?;
        acc = acc + T::from_rational(w) * d * hpow.clone() / factorial_exact::<T>(j);
        hpow = hpow * h.clone();
    }
    Ok(acc)
}

/// Regularity loss when testing on curves in a domain with the uniform β-cusp property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspLoss {
    /// `p(β) = ⌈2/β⌉`.
    pub p: i64,
    /// `q(β) = ⌈1/β⌉`.
    pub q: i64,
    /// `m · p(β)`.
    pub required_order: i64,
    /// `αβ / (2 q(β))` as `"num/den"`.
    pub output_exponent: String,
    pub output_exponent_value: f64,
}

/// Exact cusp-loss arithmetic for rational `β, α ∈ (0, 1]`.
pub fn cusp_loss(m: i64, beta: Rational64, alpha: Rational64) -> Result<CuspLoss> {
    let unit = |r: &Rational64| *r > Rational64::zero() && *r <= Rational64::one();
    if m < 1 || !unit(&beta) || !unit(&alpha) {
        return Err(Error::ParameterRange(format!(
            "cusp_loss needs m >= 1 and alpha, beta in (0, 1]; got m={m}, beta={beta}, alpha={alpha}"
        )));
    }
    let p = (Rational64::from_integer(2) / beta).ceil().to_integer();
    let q = beta.recip().ceil().to_integer();
    let exponent = alpha * beta / Rational64::from_integer(2 * q);
    Ok(CuspLoss {
        p,
        q,
        required_order: m * p,
        output_exponent: format!("{}/{}", exponent.numer(), exponent.denom()),
        output_exponent_value: *exponent.numer() as f64 / *exponent.denom() as f64,
    })
}

/// Recovers a small-denominator rational from a float (continued fractions,
/// denominators up to 10^6, tolerance 1e-12).
pub fn rational_from_decimal(x: f64) -> Result<Rational64> {
    if !x.is_finite() {
        return Err(Error::ParameterRange(format!("{x} is not finite")));
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x.abs();
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > 1_000_000 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if ((p1 as f64 / q1 as f64) - x.abs()).abs() <= 1e-12 * x.abs().max(1.0) {
            break;
        }
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    let val = Rational64::new(p1, q1);
    if ((p1 as f64 / q1 as f64) - x.abs()).abs() > 1e-9 * x.abs().max(1.0) {
        return Err(Error::ParameterRange(format!("{x} has no small rational form")));
    }
    Ok(if x < 0.0 { -val } else { val })
}

#[allow(dead_code)]
fn is_signed_zero(r: &BigRational) -> bool {
    r.is_zero() && !r.is_negative()
}
