//! Grid suprema of difference quotients: seminorms, global norms, exponent
//! estimates and membership verdicts.
//!
//! Every supremum runs over grid-aligned pairs `(x, h)` with `h = kΔx`. Ties
//! between equal maxima resolve to the smallest `x`, then the smallest `h`, so
//! results never depend on the parallel schedule.

mod classify;
mod estimate;
mod grid;
mod norms;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classify::{
    classify, classify_box, classify_with, ClassifyOptions, CriterionResult, Divergence, HolderVerdict, RouteVerdicts,
    Verdicts, GROWTH_TOL, LOG_RISE, LOG_R_SQUARED, LOG_TAIL_RISE, MIN_CLASSIFY_SCALES,
};
pub(crate) use classify::assess;
pub(crate) use norms::max_difference;
pub use estimate::{estimate_exponent, MIN_ESTIMATE_SCALES, PLATEAU_SPREAD, SATURATION_MARGIN};
pub use grid::{sample_box, sample_fn, sample_fn_with_derivatives, BoxSampledFn, SampledFn};
pub use norms::{holder_seminorm, lambda_norm, lip_norm, zygmund_seminorm, SupResult};
pub use report::{RegularityReport, ScaleRow, Witness};

/// Smallest admissible step in grid cells.
pub const MIN_STEP_CELLS: usize = 4;

/// Membership criterion tested at a derivative order `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", content = "alpha", rename_all = "snake_case")]
pub enum Criterion {
    Zygmund,
    Lipschitz,
    Holder(f64),
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Zygmund => f.write_str("zygmund"),
            Criterion::Lipschitz => f.write_str("lipschitz"),
            Criterion::Holder(a) => write!(f, "holder:{a}"),
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParameterRange(format!("unknown criterion `{s}` (zygmund | lipschitz | holder:<alpha>)"));
        match s {
            "zygmund" => Ok(Criterion::Zygmund),
            "lipschitz" => Ok(Criterion::Lipschitz),
            _ => {
                let alpha: f64 = s
                    .strip_prefix("holder:")
                    .or_else(|| s.strip_prefix("holder="))
                    .ok_or_else(bad)?
                    .parse()
                    .map_err(|_| bad())?;
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::ParameterRange(format!("holder exponent must be in (0, 1], got {alpha}")));
                }
                Ok(Criterion::Holder(alpha))
            }
        }
    }
}

/// Modulus of continuity `ω` for first-difference seminorms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "alpha", rename_all = "snake_case")]
pub enum ModulusSpec {
    /// `ω(t) = t^α`, `α ∈ (0, 1]`.
    Power(f64),
    /// `ω(t) = t log(1/t)`, used on `t < 1/e` only.
    TLog,
}

impl ModulusSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModulusSpec::Power(a) if !(a > 0.0 && a <= 1.0) => {
                Err(Error::ParameterRange(format!("power modulus needs alpha in (0, 1], got {a}")))
            }
            _ => Ok(()),
        }
    }

    /// Largest `t` on which the modulus is evaluated.
    pub fn max_step(&self) -> f64 {
        match self {
            ModulusSpec::Power(_) => f64::INFINITY,
            ModulusSpec::TLog => (-1.0f64).exp(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ModulusSpec::Power(a) => t.powf(a),
            ModulusSpec::TLog => t * (1.0 / t).ln(),
        }
    }
}

/// Which steps `h = kΔx` a supremum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSet {
    /// `k = 4, 8, 16, …`.
    Dyadic,
    /// Every `k ≥ 4`.
    #[default]
    All,
}

impl ScaleSet {
    /// Step multipliers `k` with `k ≤ k_max`. When `k_max < 4` the smallest
    /// steps are used so that short sets stay admissible.
    pub fn steps(&self, k_max: usize) -> Vec<usize> {
        let k_min = if k_max < MIN_STEP_CELLS { 1 } else { MIN_STEP_CELLS };
        match self {
            ScaleSet::All => (k_min..=k_max).collect(),
            ScaleSet::Dyadic => {
                let mut k = k_min.next_power_of_two();
                let mut out = Vec::new();
                while k <= k_max {
                    out.push(k);
                    k *= 2;
                }
                out
            }
        }
    }
}
