use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::AnalyticFn;
use crate::error::{Error, Result};
use crate::function::ScalarFn;

/// Samples of `f` (and optionally `f', f'', …`) on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFn {
    pub lo: f64,
    pub spacing: f64,
    pub values: Vec<f64>,
    /// `derivatives[j - 1]` holds samples of `f^(j)`.
    pub derivatives: Vec<Vec<f64>>,
}

impl SampledFn {
    pub fn new(lo: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        Self::with_derivatives(lo, spacing, values, Vec::new())
    }

    pub fn with_derivatives(lo: f64, spacing: f64, values: Vec<f64>, derivatives: Vec<Vec<f64>>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::ParameterRange(format!("grid spacing must be positive, got {spacing}")));
        }
        if values.len() < 2 {
            return Err(Error::ParameterRange("a grid needs at least two points".into()));
        }
        if derivatives.iter().any(|d| d.len() != values.len()) {
            return Err(Error::Dimension("derivative samples must share the grid".into()));
        }
        Ok(Self {
            lo,
            spacing,
            values,
            derivatives,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn hi(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing
    }

    /// Highest derivative order with samples.
    pub fn derivative_order(&self) -> usize {
        self.derivatives.len()
    }

    /// Samples of `f^(order)`, carrying along any higher derivatives.
    pub fn derivative_view(&self, order: usize) -> Result<SampledFn> {
        if order == 0 {
            return Ok(self.clone());
        }
        if order > self.derivatives.len() {
            return Err(Error::MissingDerivative {
                order,
                available: self.derivatives.len(),
            });
        }
        Ok(SampledFn {
            lo: self.lo,
            spacing: self.spacing,
            values: self.derivatives[order - 1].clone(),
            derivatives: self.derivatives[order..].to_vec(),
        })
    }

    /// Index range `[i0, i1]` of grid points inside `[a, b]`.
    pub fn index_range(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        let slack = 1e-9;
        let lo = ((a - self.lo) / self.spacing - slack).ceil().max(0.0);
        let hi = ((b - self.lo) / self.spacing + slack).floor().min((self.len() - 1) as f64);
        if !(a >= self.lo - slack * self.spacing && b <= self.hi() + slack * self.spacing) || lo > hi {
            return Err(Error::Domain {
                x: if a < self.lo { a } else { b },
                lo: self.lo,
                hi: self.hi(),
            });
        }
        Ok((lo as usize, hi as usize))
    }

    pub fn max_abs(&self, i0: usize, i1: usize) -> f64 {
        self.values[i0..=i1].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise `λ f` (derivatives included).
    pub fn scaled(&self, lambda: f64) -> SampledFn {
        let s = |v: &Vec<f64>| v.iter().map(|x| lambda * x).collect();
        SampledFn {
            lo: self.lo,
            spacing: self.spacing,
            values: s(&self.values),
            derivatives: self.derivatives.iter().map(s).collect(),
        }
    }

    /// Pointwise sum on a shared grid.
    pub fn sum(&self, other: &SampledFn) -> Result<SampledFn> {
        if self.lo != other.lo || self.spacing != other.spacing || self.len() != other.len() {
            return Err(Error::Dimension("sum needs identical grids".into()));
        }
        let add = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<f64>>();
        let n = self.derivatives.len().min(other.derivatives.len());
        Ok(SampledFn {
            lo: self.lo,
            spacing: self.spacing,
            values: add(&self.values, &other.values),
            derivatives: (0..n).map(|j| add(&self.derivatives[j], &other.derivatives[j])).collect(),
        })
    }
}

fn grid_spacing(lo: f64, hi: f64, points: usize) -> Result<f64> {
    if points < 2 || !(hi > lo) {
        return Err(Error::ParameterRange(format!("need hi > lo and at least two points, got [{lo}, {hi}] with {points}")));
    }
    Ok((hi - lo) / (points - 1) as f64)
}

/// Samples `f` at `points` equispaced nodes of `[lo, hi]`.
pub fn sample_fn<F: ScalarFn<f64> + Sync + ?Sized>(f: &F, lo: f64, hi: f64, points: usize) -> Result<SampledFn> {
    sample_fn_with_derivatives(f, lo, hi, points, 0)
}

/// Samples `f, f', …, f^(order)` from its exact derivative oracle.
pub fn sample_fn_with_derivatives<F: ScalarFn<f64> + Sync + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    points: usize,
    order: usize,
) -> Result<SampledFn> {
    let dx = grid_spacing(lo, hi, points)?;
    let column = |j: usize| -> Result<Vec<f64>> {
        (0..points)
            .into_par_iter()
            .map(|i| f.derivative(j, &(lo + i as f64 * dx)))
            .collect()
    };
    let values = column(0)?;
    let derivatives = (1..=order).map(column).collect::<Result<Vec<_>>>()?;
    SampledFn::with_derivatives(lo, dx, values, derivatives)
}

/// Samples on a box in `ℝ^d` with equal spacing along every axis, row-major
/// with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSampledFn {
    pub lo: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoxSampledFn {
    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut rest = flat;
        let strides = self.strides();
        strides
            .iter()
            .zip(&self.lo)
            .map(|(s, lo)| {
                let i = rest / s;
                rest %= s;
                lo + i as f64 * self.spacing
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Samples a corpus function on the cube `[lo, hi]^d` with `points` nodes per axis.
pub fn sample_box(f: &AnalyticFn, lo: f64, hi: f64, points: usize) -> Result<BoxSampledFn> {
    let dx = grid_spacing(lo, hi, points)?;
    let d = f.dim();
    let shape = vec![points; d];
    let total = points.pow(d as u32);
    let mut grid = BoxSampledFn {
        lo: vec![lo; d],
        spacing: dx,
        shape,
        values: Vec::new(),
    };
    grid.values = (0..total)
        .into_par_iter()
        .map(|flat| f.eval_point(&grid.point(flat)))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid)
}
