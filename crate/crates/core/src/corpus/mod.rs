//! Analytic test functions with exact derivative oracles and ground-truth
//! regularity labels.

mod kernel;
mod spec;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::ScalarFn;
use crate::seminorm::Criterion;
use kernel::{Kernel, Profile};

pub use spec::{FnSpec, MAX_ANTIDERIV, MAX_DIM, MAX_POLY_DEGREE, MAX_SIGN_POWER, MAX_WEIERSTRASS_DEPTH};

pub const DEFAULT_WEIERSTRASS_DEPTH: u32 = 20;

/// Ground-truth regularity class of the ideal object a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Regularity {
    /// Every derivative exists and is locally Lipschitz.
    Smooth,
    /// `f^(m)` is `alpha`-Hölder but no better, `alpha < 1`.
    Holder { m: usize, alpha: f64 },
    /// `f^(m)` is Lipschitz but `f ∉ C^{m+1}`.
    Lipschitz { m: usize },
    /// `f^(m)` is Zygmund but not Lipschitz.
    Zygmund { m: usize },
}

impl Regularity {
    fn key(&self) -> (f64, u8) {
        match *self {
            Regularity::Smooth => (f64::INFINITY, 0),
            Regularity::Holder { m, alpha } => (m as f64 + alpha, 0),
            Regularity::Zygmund { m } => (m as f64 + 1.0, 0),
            Regularity::Lipschitz { m } => (m as f64 + 1.0, 1),
        }
    }

    /// The weaker of two labels (the class of a sum of functions in independent variables).
    pub fn min(self, other: Self) -> Self {
        match self.key().partial_cmp(&other.key()) {
            Some(Ordering::Greater) => other,
            _ => self,
        }
    }

    /// Label of an `m`-fold antiderivative.
    pub fn shift(self, by: usize) -> Self {
        match self {
            Regularity::Smooth => Regularity::Smooth,
            Regularity::Holder { m, alpha } => Regularity::Holder { m: m + by, alpha },
            Regularity::Lipschitz { m } => Regularity::Lipschitz { m: m + by },
            Regularity::Zygmund { m } => Regularity::Zygmund { m: m + by },
        }
    }

    /// The order at which the label is sharp, if any.
    pub fn order(&self) -> Option<usize> {
        match *self {
            Regularity::Smooth => None,
            Regularity::Holder { m, .. } | Regularity::Lipschitz { m } | Regularity::Zygmund { m } => Some(m),
        }
    }

    /// Verdict a correct classifier must return for `criterion` at order `m`.
    pub fn expected(&self, m: usize, criterion: Criterion) -> bool {
        let Some(k) = self.order() else {
            return true;
        };
        match m.cmp(&k) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => match (*self, criterion) {
                (Regularity::Lipschitz { .. }, _) => true,
                (Regularity::Zygmund { .. }, Criterion::Zygmund) => true,
                (Regularity::Zygmund { .. }, Criterion::Lipschitz) => false,
                (Regularity::Zygmund { .. }, Criterion::Holder(beta)) => beta < 1.0,
                (Regularity::Holder { alpha, .. }, Criterion::Holder(beta)) => beta <= alpha,
                (Regularity::Holder { .. }, _) => false,
                (Regularity::Smooth, _) => true,
            },
        }
    }
}

impl fmt::Display for Regularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Regularity::Smooth => f.write_str("∈ 𝒞^∞"),
            Regularity::Holder { m, alpha } => write!(f, "∈ 𝒞^{{{m},{alpha}}} ∖ 𝒞^{{{m},β}} for β > {alpha}"),
            Regularity::Lipschitz { m } => write!(f, "∈ 𝒞^{{{m},1}} ∖ 𝒞^{{{}}}", m + 1),
            Regularity::Zygmund { m } => write!(f, "∈ 𝒵^{{{m},1}} ∖ 𝒞^{{{m},1}}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Body {
    Scalar(Kernel),
    Tensor(Vec<Kernel>),
}

/// An immutable corpus function on `ℝ^d`, `d ≤ 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticFn {
    spec: FnSpec,
    body: Body,
    label: Regularity,
    budget: Option<usize>,
}

fn kernel_of(spec: &FnSpec) -> Kernel {
    match spec {
        FnSpec::Weierstrass { depth } => Kernel::Sum(
            (0..*depth)
                .map(|k| Kernel::Sinusoid {
                    amp: 0.5f64.powi(k as i32),
                    freq: 2.0f64.powi(k as i32),
                    quarter: 0,
                })
                .collect(),
        ),
        FnSpec::PowerAbs { alpha, p } => Kernel::PowerAbs {
            coef: 1.0,
            sign_power: *p,
            exponent: *p as f64 + alpha,
        },
        FnSpec::TLog => Kernel::XnLog { coef: 1.0, n: 1 },
        FnSpec::Poly(c) => Kernel::Poly(c.clone()),
        FnSpec::Sin => Kernel::Sinusoid {
            amp: 1.0,
            freq: 1.0,
            quarter: 0,
        },
        FnSpec::Cos => Kernel::Sinusoid {
            amp: 1.0,
            freq: 1.0,
            quarter: 1,
        },
        FnSpec::Exp => Kernel::Exp { coef: 1.0 },
        FnSpec::Bump { a, b } => Kernel::Profile {
            profile: Profile::Bump { a: *a, b: *b },
            order: 0,
        },
        FnSpec::Cutoff { r } => Kernel::Profile {
            profile: Profile::Cutoff { r: *r },
            order: 0,
        },
        FnSpec::Antideriv { m, inner } => (0..*m).fold(kernel_of(inner), |k, _| k.integrate()),
        FnSpec::Tensor(_) => unreachable!("tensor factors are handled by the caller"),
    }
}

fn label_of(spec: &FnSpec) -> Regularity {
    match spec {
        FnSpec::Weierstrass { .. } | FnSpec::TLog => Regularity::Zygmund { m: 0 },
        FnSpec::PowerAbs { alpha, p } => {
            if *alpha >= 1.0 {
                Regularity::Lipschitz { m: *p as usize }
            } else {
                Regularity::Holder {
                    m: *p as usize,
                    alpha: *alpha,
                }
            }
        }
        FnSpec::Poly(_) | FnSpec::Sin | FnSpec::Cos | FnSpec::Exp | FnSpec::Bump { .. } | FnSpec::Cutoff { .. } => {
            Regularity::Smooth
        }
        FnSpec::Antideriv { m, inner } => label_of(inner).shift(*m),
        FnSpec::Tensor(parts) => parts
            .iter()
            .map(label_of)
            .reduce(Regularity::min)
            .unwrap_or(Regularity::Smooth),
    }
}

fn budget_of(spec: &FnSpec) -> Option<usize> {
    match spec {
        FnSpec::Weierstrass { .. } | FnSpec::TLog => Some(0),
        FnSpec::PowerAbs { p, .. } => Some(*p as usize),
        FnSpec::Antideriv { m, inner } => budget_of(inner).map(|b| b + m),
        FnSpec::Tensor(parts) => parts.iter().filter_map(budget_of).min(),
        _ => None,
    }
}

impl AnalyticFn {
    pub fn new(spec: FnSpec) -> Result<Self> {
        spec.validate()?;
        let body = match &spec {
            FnSpec::Tensor(parts) => Body::Tensor(parts.iter().map(kernel_of).collect()),
            other => Body::Scalar(kernel_of(other)),
        };
        Ok(Self {
            label: label_of(&spec),
            budget: budget_of(&spec),
            spec,
            body,
        })
    }

    pub fn spec(&self) -> &FnSpec {
        &self.spec
    }

    pub fn label(&self) -> Regularity {
        self.label
    }

    /// Highest exact derivative order; `None` means unlimited.
    pub fn max_exact_derivative_order(&self) -> Option<usize> {
        self.budget
    }

    pub fn dim(&self) -> usize {
        match &self.body {
            Body::Scalar(_) => 1,
            Body::Tensor(parts) => parts.len(),
        }
    }

    fn check_order(&self, order: usize) -> Result<()> {
        match self.budget {
            Some(b) if order > b => Err(Error::MissingDerivative { order, available: b }),
            _ => Ok(()),
        }
    }

    fn kernels(&self) -> &[Kernel] {
        match &self.body {
            Body::Scalar(k) => std::slice::from_ref(k),
            Body::Tensor(parts) => parts,
        }
    }

    /// Value at a point of `ℝ^d`.
    pub fn eval_point(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!("expected {} coordinates, got {}", self.dim(), x.len())));
        }
        Ok(self.kernels().iter().zip(x).map(|(k, xi)| k.eval(*xi)).sum())
    }

    /// `∂_axis^order f(x)`. For tensor functions mixed partials vanish, so this
    /// is the full set of nonzero partial derivatives.
    pub fn partial(&self, axis: usize, order: usize, x: &[f64]) -> Result<f64> {
        if order == 0 {
            return self.eval_point(x);
        }
        self.check_order(order)?;
        if x.len() != self.dim() || axis >= self.dim() {
            return Err(Error::Dimension(format!("axis {axis} / point of length {} for d={}", x.len(), self.dim())));
        }
        Ok(self.kernels()[axis].nth_derive(order).eval(x[axis]))
    }

    /// One coordinate factor `f_j` of a tensor function, as a 1-D function.
    pub fn factor(&self, axis: usize) -> Result<AnalyticFn> {
        match &self.spec {
            FnSpec::Tensor(parts) => parts
                .get(axis)
                .cloned()
                .ok_or_else(|| Error::Dimension(format!("no factor {axis}")))
                .and_then(AnalyticFn::new),
            _ if axis == 0 => Ok(self.clone()),
            _ => Err(Error::Dimension(format!("no factor {axis}"))),
        }
    }

    /// Evaluator for `f^(order)` that avoids re-deriving per point.
    pub fn derivative_fn(&self, order: usize) -> Result<DerivedFn> {
        self.check_order(order)?;
        match &self.body {
            Body::Scalar(k) => Ok(DerivedFn(k.nth_derive(order))),
            Body::Tensor(_) => Err(Error::Dimension("derivative_fn needs a one-dimensional function".into())),
        }
    }
}

impl fmt::Display for AnalyticFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

impl std::str::FromStr for AnalyticFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AnalyticFn::new(s.parse()?)
    }
}

impl ScalarFn<f64> for AnalyticFn {
    fn eval(&self, x: &f64) -> Result<f64> {
        self.eval_point(std::slice::from_ref(x))
    }
    fn derivative(&self, order: usize, x: &f64) -> Result<f64> {
        self.partial(0, order, std::slice::from_ref(x))
    }
    fn derivative_budget(&self) -> Option<usize> {
        self.budget
    }
}

/// A fixed derivative of a one-dimensional corpus function.
#[derive(Debug, Clone)]
pub struct DerivedFn(Kernel);

impl DerivedFn {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.eval(x)
    }
}

/// Validates and builds a corpus function.
pub fn make_function(spec: FnSpec) -> Result<AnalyticFn> {
    AnalyticFn::new(spec)
}

/// `m`-fold antiderivative with base point 0; closed form where available,
/// adaptive quadrature of the Cauchy formula otherwise.
pub fn iterated_antiderivative(f: &AnalyticFn, m: usize) -> Result<AnalyticFn> {
    if f.dim() != 1 {
        return Err(Error::Dimension("antiderivatives need a one-dimensional function".into()));
    }
    AnalyticFn::new(FnSpec::Antideriv {
        m,
        inner: Box::new(f.spec.clone()),
    })
}

/// `f(x) = Σ_j f_j(x_j)`.
pub fn tensorize(factors: &[AnalyticFn]) -> Result<AnalyticFn> {
    AnalyticFn::new(FnSpec::Tensor(factors.iter().map(|f| f.spec.clone()).collect()))
}

/// A corpus member with the interval its label is checked on.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub function: AnalyticFn,
    pub interval: (f64, f64),
}

/// The reference corpus: every one-dimensional function family at a
/// representative parameter.
pub fn standard_corpus() -> Vec<CorpusEntry> {
    let entries: [(&str, (f64, f64)); 14] = [
        ("weierstrass:depth=20", (-1.0, 1.0)),
        ("tlog", (-0.25, 0.25)),
        ("power_abs:alpha=0.5", (-1.0, 1.0)),
        ("power_abs:alpha=0.3", (-1.0, 1.0)),
        ("power_abs:alpha=0.5,p=1", (-1.0, 1.0)),
        ("power_abs:alpha=1", (-1.0, 1.0)),
        ("poly:1,0,2", (-1.0, 1.0)),
        ("sin", (-1.0, 1.0)),
        ("cos", (-1.0, 1.0)),
        ("exp", (-1.0, 1.0)),
        ("bump:a=-1,b=1", (-1.0, 1.0)),
        ("cutoff:r=1", (-2.5, 2.5)),
        ("antideriv:m=1(weierstrass:depth=20)", (-1.0, 1.0)),
        ("antideriv:m=1(tlog)", (-0.25, 0.25)),
    ];
    entries
        .iter()
        .map(|(s, interval)| CorpusEntry {
            function: s.parse().expect("corpus specs are valid"),
            interval: *interval,
        })
        .collect()
}
