//! The superposition operator `g ↦ f∘g` on `Λ_{m+1}`.
//!
//! The curve `t ↦ f∘(g + t)` with `g` a cutoff identity is Lipschitz into
//! `Λ_{m+1}` exactly when `f ∈ 𝒵^{m+1,1}`. Two measurements are offered:
//! operator difference quotients `‖F(t) - F(0)‖_{Λ_{m+1}} / t` (for `k = 1`)
//! and the mixed statistic `sup |Δ^k_t Δ²_t f^(m)| / t^{k+1}` for any `k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::AnalyticFn;
use crate::error::{Error, Result};
use crate::faa_di_bruno::compose_derivative;
use crate::output::to_canonical_json;
use crate::seminorm::{
    assess, classify_with, lambda_norm, max_difference, sample_fn_with_derivatives, ClassifyOptions, Divergence,
    SampledFn, ScaleRow, ScaleSet, GROWTH_TOL,
};

/// Finest and coarsest admissible translation `t`, as powers of two.
pub const FINEST_SCALE_EXP: i32 = 12;
pub const COARSEST_SCALE_EXP: i32 = 2;
/// Grid cells per finest scale.
const CELLS_PER_SCALE: f64 = 4.0;

/// Samples of `f∘(g + shift)` and its first `order` derivatives on `[lo, hi]`.
fn superpose_shifted(
    f: &AnalyticFn,
    g: &AnalyticFn,
    shift: f64,
    (lo, hi): (f64, f64),
    points: usize,
    order: usize,
) -> Result<SampledFn> {
    if f.dim() != 1 || g.dim() != 1 {
        return Err(Error::Dimension("superposition experiments are one-dimensional".into()));
    }
    let outer = (1..=order).map(|i| f.derivative_fn(i)).collect::<Result<Vec<_>>>()?;
    let inner = (1..=order).map(|i| g.derivative_fn(i)).collect::<Result<Vec<_>>>()?;
    let g0 = g.derivative_fn(0)?;
    let f0 = f.derivative_fn(0)?;
    if points < 2 || !(lo < hi) {
        return Err(Error::ParameterRange("superposition needs lo < hi and two points".into()));
    }
    let dx = (hi - lo) / (points - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let x = if i + 1 == points { hi } else { lo + i as f64 * dx };
            let y = g0.eval(x) + shift;
            let mut gd = vec![y];
            gd.extend(inner.iter().map(|d| d.eval(x)));
            let mut fd = vec![f0.eval(y)];
            fd.extend(outer.iter().map(|d| d.eval(y)));
            (0..=order).map(|j| compose_derivative(&fd, &gd, j)).collect()
        })
        .collect();
    let values = rows.iter().map(|r| r[0]).collect();
    let derivatives = (1..=order).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    SampledFn::with_derivatives(lo, dx, values, derivatives)
}

/// Samples of `f∘g` and `∂^j(f∘g)`, `j ≤ order`, via Faà di Bruno.
pub fn superpose(f: &AnalyticFn, g: &AnalyticFn, interval: (f64, f64), points: usize, order: usize) -> Result<SampledFn> {
    superpose_shifted(f, g, 0.0, interval, points, order)
}

/// Grid `‖f∘(g + t)‖_{Λ_{m+1}}`.
pub fn translation_curve_norm(
    f: &AnalyticFn,
    g: &AnalyticFn,
    m: usize,
    t: f64,
    interval: (f64, f64),
    points: usize,
) -> Result<f64> {
    if t.abs() > 1.0 {
        return Err(Error::ParameterRange(format!("translation must satisfy |t| <= 1, got {t}")));
    }
    let samples = superpose_shifted(f, g, t, interval, points, m)?;
    lambda_norm(&samples, (m + 1) as f64, ScaleSet::Dyadic)
}

fn default_inner() -> String {
    "cutoff:r=1".into()
}
fn default_scales() -> Vec<f64> {
    (COARSEST_SCALE_EXP..=FINEST_SCALE_EXP).map(|e| 0.5f64.powi(e)).collect()
}
fn default_interval() -> [f64; 2] {
    [-2.5, 2.5]
}

/// One superposition experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionExperiment {
    pub outer: String,
    #[serde(default = "default_inner")]
    pub inner: String,
    pub m: usize,
    pub k: usize,
    /// Dyadic translations `t` (and `v = t`), within `[2^-12, 2^-2]`.
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    /// Grid interval for operator norms; it should cover the support of `g`.
    #[serde(default = "default_interval")]
    pub interval: [f64; 2],
}

impl SuperpositionExperiment {
    pub fn new(outer: &str, m: usize, k: usize) -> Self {
        Self {
            outer: outer.into(),
            inner: default_inner(),
            m,
            k,
            scales: default_scales(),
            interval: default_interval(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 {
            return Err(Error::ParameterRange("superposition needs m >= 1 and k >= 1".into()));
        }
        for &t in &self.scales {
            let e = -t.log2();
            let dyadic = t > 0.0 && e.fract() == 0.0;
            if !dyadic || e < COARSEST_SCALE_EXP as f64 || e > FINEST_SCALE_EXP as f64 {
                return Err(Error::ParameterRange(format!(
                    "scales must be powers of two in [2^-{FINEST_SCALE_EXP}, 2^-{COARSEST_SCALE_EXP}], got {t}"
                )));
            }
        }
        if self.scales.len() < 3 {
            return Err(Error::InsufficientScales {
                found: self.scales.len(),
                required: 3,
            });
        }
        if !(self.interval[0] < self.interval[1]) {
            return Err(Error::ParameterRange("interval must have lo < hi".into()));
        }
        Ok(())
    }

    fn sorted_scales(&self) -> Vec<f64> {
        let mut s = self.scales.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        s.dedup();
        s
    }

    fn finest(&self) -> f64 {
        self.scales.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A per-scale table with its growth assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTable {
    pub statistic: String,
    pub rows: Vec<ScaleRow>,
    pub growth: Option<f64>,
    pub log_r_squared: Option<f64>,
    pub divergence: Divergence,
    pub bounded: bool,
}

fn table(statistic: String, rows: Vec<ScaleRow>) -> ScaleTable {
    let a = assess(&rows);
    ScaleTable {
        statistic,
        rows,
        growth: a.growth,
        log_r_squared: a.r2,
        bounded: a.divergence == Divergence::None && a.growth.is_none_or(|g| g <= GROWTH_TOL),
        divergence: a.divergence,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRatioReport {
    pub experiment: SuperpositionExperiment,
    /// `‖F(t) - F(0)‖_{Λ_{m+1}} / t`; only for `k = 1`.
    pub operator_ratios: Option<ScaleTable>,
    /// `sup_x |Δ^k_t Δ²_t f^(m)(x)| / t^{k+1}` over `x ∈ [-1, 1]`.
    pub mixed: ScaleTable,
    pub lipschitz_compatible: bool,
}

impl LipschitzRatioReport {
    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(self)
    }
}

/// Mixed statistic of `f^(m)` at every scale, on `[-1, 1]` with the finest
/// scale spanning four grid cells.
fn mixed_table(f: &AnalyticFn, exp: &SuperpositionExperiment, scales: &[f64]) -> Result<ScaleTable> {
    let (m, k) = (exp.m, exp.k);
    let dx = exp.finest() / CELLS_PER_SCALE;
    let points = (2.0 / dx).round() as usize + 1;
    let derived = f.derivative_fn(m)?;
    let values: Vec<f64> = (0..points).into_par_iter().map(|i| derived.eval(-1.0 + i as f64 * dx)).collect();
    let n = k + 2;
    let rows = scales
        .iter()
        .map(|&t| {
            let cells = (t / dx).round() as usize;
            let (d, j) = max_difference(&values, 0, points - 1, n, cells).ok_or_else(|| {
                Error::EmptyAdmissibleSet(format!("Δ^{n} at t = {t} does not fit in [-1, 1]"))
            })?;
            Ok(ScaleRow {
                h: t,
                statistic: d / t.powi((k + 1) as i32),
                witness_x: -1.0 + j as f64 * dx,
                noise: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(table(format!("sup |Δ^{k}_t Δ²_t f^({m})| / t^{}", k + 1), rows))
}

/// Operator difference quotients and the mixed statistic, with a
/// Lipschitz verdict requiring every computed table to stay bounded.
pub fn lipschitz_ratio_test(exp: &SuperpositionExperiment) -> Result<LipschitzRatioReport> {
    exp.validate()?;
    let f: AnalyticFn = exp.outer.parse()?;
    let g: AnalyticFn = exp.inner.parse()?;
    let scales = exp.sorted_scales();
    let mixed = mixed_table(&f, exp, &scales)?;
    let operator_ratios = if exp.k == 1 {
        let [lo, hi] = exp.interval;
        let dx = exp.finest() / CELLS_PER_SCALE;
        let points = ((hi - lo) / dx).round() as usize + 1;
        let base = superpose_shifted(&f, &g, 0.0, (lo, hi), points, exp.m)?;
        let rows = scales
            .iter()
            .map(|&t| {
                let moved = superpose_shifted(&f, &g, t, (lo, hi), points, exp.m)?;
                let diff = moved.sum(&base.scaled(-1.0))?;
                let norm = lambda_norm(&diff, (exp.m + 1) as f64, ScaleSet::Dyadic)?;
                Ok(ScaleRow {
                    h: t,
                    statistic: norm / t,
                    witness_x: f64::NAN,
                    noise: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(table(format!("‖F(t) - F(0)‖_Λ{} / t", exp.m + 1), rows))
    } else {
        None
    };
    let lipschitz_compatible = mixed.bounded && operator_ratios.as_ref().is_none_or(|t| t.bounded);
    Ok(LipschitzRatioReport {
        experiment: exp.clone(),
        operator_ratios,
        mixed,
        lipschitz_compatible,
    })
}

/// Predicted verdict (classifier on `f` at order `m + k`) against the measured one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionVerdict {
    pub experiment: SuperpositionExperiment,
    pub label: String,
    pub predicted: bool,
    pub measured: bool,
    pub agreement: bool,
    pub ratio_test: LipschitzRatioReport,
}

impl SuperpositionVerdict {
    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(self)
    }
}

/// Grid used for the predicted verdict.
pub const PREDICT_POINTS: usize = (1 << 16) + 1;
pub const PREDICT_INTERVAL: (f64, f64) = (-1.0, 1.0);

pub fn classify_superposition(exp: &SuperpositionExperiment) -> Result<SuperpositionVerdict> {
    exp.validate()?;
    let f: AnalyticFn = exp.outer.parse()?;
    let order = exp.m + exp.k;
    let (lo, hi) = PREDICT_INTERVAL;
    let samples = sample_fn_with_derivatives(&f, lo, hi, PREDICT_POINTS, order)?;
    let options = ClassifyOptions {
        holder_exponents: Vec::new(),
        ..ClassifyOptions::default()
    };
    let report = classify_with(&samples, order, PREDICT_INTERVAL, &options)?;
    let predicted = report.verdicts.as_ref().is_some_and(|v| v.zygmund);
    let ratio_test = lipschitz_ratio_test(exp)?;
    let measured = ratio_test.lipschitz_compatible;
    Ok(SuperpositionVerdict {
        experiment: exp.clone(),
        label: f.label().to_string(),
        predicted,
        measured,
        agreement: predicted == measured,
        ratio_test,
    })
}
