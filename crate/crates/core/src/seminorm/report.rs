use serde::{Deserialize, Serialize};

use super::classify::{CriterionResult, Verdicts};
use crate::error::Result;
use crate::output::{format_float, to_canonical_json, to_csv};

/// A pair `(x, h)` attaining a supremum, with the attained value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub h: f64,
    pub value: f64,
}

/// One scale of a per-scale statistic table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub h: f64,
    pub statistic: f64,
    pub witness_x: f64,
    /// The raw difference was under the rounding floor, so the row is not fitted.
    pub noise: bool,
}

/// Per-scale table, fitted exponent and verdicts for one sampled function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub function: Option<String>,
    pub interval: [f64; 2],
    pub spacing: f64,
    /// Difference order `n` for exponent estimates, derivative order `m` for classification.
    pub order: usize,
    pub statistic: String,
    /// Strictly decreasing dyadic steps.
    pub scales: Vec<ScaleRow>,
    pub exponent: Option<f64>,
    pub residual: Option<f64>,
    /// Inclusive indices into `scales` of the fitted plateau.
    pub window: Option<[usize; 2]>,
    pub saturated: bool,
    pub criteria: Vec<CriterionResult>,
    pub verdicts: Option<Verdicts>,
    pub witness: Option<Witness>,
}

impl RegularityReport {
    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(self)
    }

    /// One row per scale of the main table: `h, statistic, witness_x`.
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .scales
            .iter()
            .map(|r| vec![format_float(r.h), format_float(r.statistic), format_float(r.witness_x)])
            .collect();
        to_csv(&["h", "statistic", "witness_x"], &rows)
    }

    /// Every criterion table, prefixed by the statistic name.
    pub fn criteria_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .criteria
            .iter()
            .flat_map(|c| {
                c.scales.iter().map(move |r| {
                    vec![
                        c.statistic.clone(),
                        format_float(r.h),
                        format_float(r.statistic),
                        format_float(r.witness_x),
                    ]
                })
            })
            .collect();
        to_csv(&["table", "h", "statistic", "witness_x"], &rows)
    }
}
