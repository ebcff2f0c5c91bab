use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{difference_table, dyadic_multipliers, noise_threshold};
use super::norms::{better, difference_weights};
use super::report::{RegularityReport, ScaleRow, Witness};
use super::{BoxSampledFn, Criterion, SampledFn};
use crate::error::{Error, Result};
use crate::fit::linear_fit;

/// Largest log-log growth rate, fitted over the finer half of the scales, still read as bounded.
pub const GROWTH_TOL: f64 = 0.1;
/// `R²` above which a linear-in-`log(1/h)` trend counts as logarithmic divergence.
pub const LOG_R_SQUARED: f64 = 0.9;
/// Minimum relative rise of that linear trend across the scale window.
pub const LOG_RISE: f64 = 0.5;
/// Minimum relative rise of the same trend over the finer half of the scales.
pub const LOG_TAIL_RISE: f64 = 0.3;
pub const MIN_CLASSIFY_SCALES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    None,
    Power,
    Logarithmic,
}

/// Per-scale table and boundedness assessment of one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    /// `None` for the side condition `δ^m_eq f` bounded.
    pub criterion: Option<Criterion>,
    /// `difference` (values of `f`) or `derivative` (samples of `f^(m)`).
    pub route: String,
    pub statistic: String,
    pub scales: Vec<ScaleRow>,
    /// Slope of `log S` against `log(1/h)`.
    pub growth: Option<f64>,
    pub log_r_squared: Option<f64>,
    pub log_rise: Option<f64>,
    /// Relative rise of the same trend over the finer half of the scales.
    pub log_tail_rise: Option<f64>,
    pub divergence: Divergence,
    pub bounded: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderVerdict {
    pub alpha: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteVerdicts {
    pub zygmund: bool,
    pub lipschitz: bool,
    pub holder: Vec<HolderVerdict>,
}

/// Membership verdicts at derivative order `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub m: usize,
    /// Both conditions below hold.
    pub zygmund: bool,
    /// `h δ^{m+2}_eq f` bounded.
    pub zygmund_statistic_bounded: bool,
    /// `δ^m_eq f` bounded, reported on its own.
    pub side_condition_bounded: bool,
    /// `δ^{m+1}_eq f` bounded.
    pub lipschitz: bool,
    /// `|h|^{1-α} δ^{m+1}_eq f` bounded.
    pub holder: Vec<HolderVerdict>,
    /// Same criteria read off samples of `f^(m)` directly, when available.
    pub derivative_route: Option<RouteVerdicts>,
}

impl Verdicts {
    pub fn get(&self, criterion: Criterion) -> Option<bool> {
        match criterion {
            Criterion::Zygmund => Some(self.zygmund),
            Criterion::Lipschitz => Some(self.lipschitz),
            Criterion::Holder(a) => self.holder.iter().find(|h| h.alpha == a).map(|h| h.bounded),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub holder_exponents: Vec<f64>,
    /// Cross-check on derivative samples when the grid carries them.
    pub derivative_route: bool,
    /// Largest step `h` admitted to the scale table; `None` keeps every dyadic scale.
    #[serde(default)]
    pub max_step: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            holder_exponents: vec![0.5],
            derivative_route: true,
            max_step: None,
        }
    }
}

pub(crate) struct Assessment {
    pub(crate) growth: Option<f64>,
    pub(crate) r2: Option<f64>,
    pub(crate) rise: Option<f64>,
    pub(crate) tail_rise: Option<f64>,
    pub(crate) divergence: Divergence,
}

pub(crate) fn assess(scales: &[ScaleRow]) -> Assessment {
    let usable: Vec<&ScaleRow> = scales.iter().filter(|r| !r.noise && r.statistic > 0.0).collect();
    if usable.len() < 3 {
        return Assessment {
            growth: None,
            r2: None,
            rise: None,
            tail_rise: None,
            divergence: Divergence::None,
        };
    }
    let u: Vec<f64> = usable.iter().map(|r| -r.h.ln()).collect();
    let logs: Vec<f64> = usable.iter().map(|r| r.statistic.ln()).collect();
    let lin: Vec<f64> = usable.iter().map(|r| r.statistic).collect();
    // Power growth is read off the finer half, where pre-asymptotic drift has died out.
    let tail = usable.len().div_ceil(2);
    let tail = usable.len() - tail.max(3);
    let growth = linear_fit(&u[tail..], &logs[tail..]).map(|f| f.slope);
    let (r2, rise) = linear_trend(&u, &lin);
    let (_, tail_rise) = linear_trend(&u[tail..], &lin[tail..]);
    // A good linear fit in log(1/h) is read as logarithmic even when the
    // log-log slope also exceeds the tolerance. The trend has to persist over
    // the finer half: sups that saturate from below flatten out there.
    let divergence = if r2.is_some_and(|r| r > LOG_R_SQUARED)
        && rise.is_some_and(|r| r > LOG_RISE)
        && tail_rise.is_some_and(|r| r > LOG_TAIL_RISE)
    {
        Divergence::Logarithmic
    } else if growth.is_some_and(|g| g > GROWTH_TOL) {
        Divergence::Power
    } else {
        Divergence::None
    };
    Assessment {
        growth,
        r2,
        rise,
        tail_rise,
        divergence,
    }
}

/// `R²` and relative rise of the linear fit of `lin` against `u`.
fn linear_trend(u: &[f64], lin: &[f64]) -> (Option<f64>, Option<f64>) {
    match linear_fit(u, lin) {
        Some(f) => {
            let (u0, u1) = (u[0].min(u[u.len() - 1]), u[0].max(u[u.len() - 1]));
            let start = f.predict(u0);
            let delta = f.slope * (u1 - u0);
            let rise = if start > 0.0 {
                delta / start
            } else if delta > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            (Some(f.r_squared), Some(rise))
        }
        None => (None, None),
    }
}

/// Builds a criterion result from raw per-scale sups `(h, sup |Δ|, witness_x)`.
fn criterion_result(
    criterion: Option<Criterion>,
    route: &str,
    statistic: String,
    raw: &[(f64, f64, f64)],
    power: f64,
    floor: f64,
) -> CriterionResult {
    let scales: Vec<ScaleRow> = raw
        .iter()
        .map(|&(h, d, x)| ScaleRow {
            h,
            statistic: d / h.powf(power),
            witness_x: x,
            noise: d <= floor,
        })
        .collect();
    let a = assess(&scales);
    let witness = scales
        .iter()
        .filter(|r| !r.noise)
        .map(|r| Witness {
            x: r.witness_x,
            h: r.h,
            value: r.statistic,
        })
        .fold(None, |acc: Option<Witness>, w| match acc {
            Some(b) if !better(&w, &b) => Some(b),
            _ => Some(w),
        });
    CriterionResult {
        criterion,
        route: route.into(),
        statistic,
        scales,
        growth: a.growth,
        log_r_squared: a.r2,
        log_rise: a.rise,
        log_tail_rise: a.tail_rise,
        bounded: a.divergence == Divergence::None,
        divergence: a.divergence,
        witness,
    }
}

/// Raw per-scale sups `(h, sup |Δ^n_h|, x)` of a 1-D grid.
type RawTable = Vec<(f64, f64, f64)>;

trait Tables {
    fn raw(&self, n: usize, ks: &[usize]) -> RawTable;
    fn floor(&self, n: usize) -> f64;
}

struct Line<'a> {
    f: &'a SampledFn,
    i0: usize,
    i1: usize,
    max_abs: f64,
}

impl Tables for Line<'_> {
    fn raw(&self, n: usize, ks: &[usize]) -> RawTable {
        if n == 0 {
            let (v, j) = (self.i0..=self.i1).fold((-1.0, self.i0), |(b, bj), j| {
                let a = self.f.values[j].abs();
                if a > b {
                    (a, j)
                } else {
                    (b, bj)
                }
            });
            return ks.iter().map(|&k| (k as f64 * self.f.spacing, v, self.f.x(j))).collect();
        }
        difference_table(self.f, self.i0, self.i1, n, ks)
            .into_iter()
            .zip(ks)
            .map(|((d, j), &k)| (k as f64 * self.f.spacing, d, self.f.x(j)))
            .collect()
    }
    fn floor(&self, n: usize) -> f64 {
        noise_threshold(n, self.max_abs)
    }
}

fn verdicts_from(
    m: usize,
    tables: &dyn Tables,
    ks: &[usize],
    options: &ClassifyOptions,
    route: &str,
    criteria: &mut Vec<CriterionResult>,
) -> RouteVerdicts {
    let derivative = route == "derivative";
    // On the derivative route the statistics act on f^(m) with m = 0.
    let base = if derivative { 0 } else { m };
    let (nz, nl) = (base + 2, base + 1);
    let zy_raw = tables.raw(nz, ks);
    let lip_raw = tables.raw(nl, ks);
    let name = |n: usize, p: String| {
        if derivative {
            format!("sup |Δ^{n}_h f^({m})| / h^{p}")
        } else {
            format!("sup |Δ^{n}_h f| / h^{p}")
        }
    };
    let zy = criterion_result(
        Some(Criterion::Zygmund),
        route,
        name(nz, format!("{}", base + 1)),
        &zy_raw,
        (base + 1) as f64,
        tables.floor(nz),
    );
    let lip = criterion_result(
        Some(Criterion::Lipschitz),
        route,
        name(nl, format!("{}", base + 1)),
        &lip_raw,
        (base + 1) as f64,
        tables.floor(nl),
    );
    let mut holder = Vec::new();
    let (zb, lb) = (zy.bounded, lip.bounded);
    criteria.push(zy);
    criteria.push(lip);
    for &alpha in &options.holder_exponents {
        let c = criterion_result(
            Some(Criterion::Holder(alpha)),
            route,
            name(nl, format!("{}", base as f64 + alpha)),
            &lip_raw,
            base as f64 + alpha,
            tables.floor(nl),
        );
        holder.push(HolderVerdict {
            alpha,
            bounded: c.bounded,
        });
        criteria.push(c);
    }
    RouteVerdicts {
        zygmund: zb,
        lipschitz: lb,
        holder,
    }
}

fn capped(ks: Vec<usize>, spacing: f64, options: &ClassifyOptions) -> Vec<usize> {
    match options.max_step {
        Some(cap) => ks.into_iter().filter(|&k| k as f64 * spacing <= cap * (1.0 + 1e-12)).collect(),
        None => ks,
    }
}

fn check_options(options: &ClassifyOptions) -> Result<()> {
    if options.max_step.is_some_and(|h| !(h > 0.0)) {
        return Err(Error::ParameterRange("max_step must be positive".into()));
    }
    for &a in &options.holder_exponents {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::ParameterRange(format!("holder exponent must be in (0, 1], got {a}")));
        }
    }
    Ok(())
}

fn assemble(
    m: usize,
    tables: &dyn Tables,
    ks: &[usize],
    options: &ClassifyOptions,
    derivative_tables: Option<&dyn Tables>,
) -> (Verdicts, Vec<CriterionResult>) {
    let mut criteria = Vec::new();
    let route = verdicts_from(m, tables, ks, options, "difference", &mut criteria);
    let side_raw = tables.raw(m, ks);
    let side = criterion_result(
        None,
        "difference",
        if m == 0 {
            "sup |f|".to_string()
        } else {
            format!("sup |Δ^{m}_h f| / h^{m}")
        },
        &side_raw,
        m as f64,
        if m == 0 { 0.0 } else { tables.floor(m) },
    );
    let side_bounded = side.bounded;
    criteria.push(side);
    let derivative_route = derivative_tables.map(|t| verdicts_from(m, t, ks, options, "derivative", &mut criteria));
    let verdicts = Verdicts {
        m,
        zygmund: route.zygmund && side_bounded,
        zygmund_statistic_bounded: route.zygmund,
        side_condition_bounded: side_bounded,
        lipschitz: route.lipschitz,
        holder: route.holder,
        derivative_route,
    };
    (verdicts, criteria)
}

/// Membership verdicts for `f` at order `m` on `K` with default options.
pub fn classify(f: &SampledFn, m: usize, k_interval: (f64, f64)) -> Result<RegularityReport> {
    classify_with(f, m, k_interval, &ClassifyOptions::default())
}

/// Membership of `f^(m)` in the Zygmund, Lipschitz and Hölder classes,
/// decided from the growth of per-scale suprema of `Δ^{m+2}_h f / h^{m+1}`,
/// `Δ^{m+1}_h f / h^{m+1}` and `Δ^{m+1}_h f / h^{m+α}` over dyadic `h`.
pub fn classify_with(
    f: &SampledFn,
    m: usize,
    k_interval: (f64, f64),
    options: &ClassifyOptions,
) -> Result<RegularityReport> {
    check_options(options)?;
    let (i0, i1) = f.index_range(k_interval.0, k_interval.1)?;
    let ks = capped(dyadic_multipliers(i1 - i0, m + 2), f.spacing, options);
    if ks.len() < MIN_CLASSIFY_SCALES {
        return Err(Error::InsufficientScales {
            found: ks.len(),
            required: MIN_CLASSIFY_SCALES,
        });
    }
    let line = Line {
        f,
        i0,
        i1,
        max_abs: f.max_abs(i0, i1),
    };
    let deriv = if options.derivative_route && f.derivative_order() >= m && m > 0 {
        Some(f.derivative_view(m)?)
    } else {
        None
    };
    let dline = deriv.as_ref().map(|d| Line {
        f: d,
        i0,
        i1,
        max_abs: d.max_abs(i0, i1),
    });
    let (verdicts, criteria) = assemble(m, &line, &ks, options, dline.as_ref().map(|l| l as &dyn Tables));
    let main = criteria[0].clone();
    Ok(RegularityReport {
        function: None,
        interval: [k_interval.0, k_interval.1],
        spacing: f.spacing,
        order: m,
        statistic: main.statistic.clone(),
        scales: main.scales.clone(),
        exponent: main.growth,
        residual: None,
        window: None,
        saturated: false,
        criteria,
        verdicts: Some(verdicts),
        witness: main.witness,
    })
}

/// Lattice directions in `{-1, 0, 1}^d \ {0}` up to sign.
fn lattice_directions(d: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let e: Vec<i64> = (0..d)
            .map(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            })
            .collect();
        if let Some(first) = e.iter().find(|&&v| v != 0) {
            if *first > 0 {
                out.push(e);
            }
        }
    }
    out.sort();
    out
}

struct Cube<'a> {
    f: &'a BoxSampledFn,
    directions: Vec<Vec<i64>>,
    max_abs: f64,
}

impl Tables for Cube<'_> {
    fn raw(&self, n: usize, ks: &[usize]) -> RawTable {
        let g = self.f;
        let strides = g.strides();
        let w = difference_weights(n);
        ks.iter()
            .map(|&k| {
                let h = k as f64 * g.spacing;
                if n == 0 {
                    return (h, self.max_abs, g.lo[0]);
                }
                let per_dir: Vec<(f64, f64, usize)> = self
                    .directions
                    .par_iter()
                    .map(|e| {
                        let norm = (e.iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt();
                        let offset: i64 = e.iter().zip(&strides).map(|(v, s)| v * *s as i64 * k as i64).sum();
                        let span = (n * k) as i64;
                        let mut best = (-1.0, 0usize);
                        for flat in 0..g.values.len() {
                            let mut rest = flat;
                            let inside = strides.iter().zip(&g.shape).zip(e).all(|((s, len), v)| {
                                let i = (rest / s) as i64;
                                rest %= s;
                                let end = i + v * span;
                                end >= 0 && end < *len as i64
                            });
                            if !inside {
                                continue;
                            }
                            let d = w
                                .iter()
                                .enumerate()
                                .map(|(r, c)| c * g.values[(flat as i64 + r as i64 * offset) as usize])
                                .sum::<f64>()
                                .abs();
                            if d > best.0 {
                                best = (d, flat);
                            }
                        }
                        // normalize by the Euclidean step length
                        (best.0 / norm.powi(n as i32), norm, best.1)
                    })
                    .collect();
                let (d, _, flat) = per_dir
                    .into_iter()
                    .fold((-1.0, 0.0, 0usize), |acc, v| if v.0 > acc.0 { v } else { acc });
                (h, d, g.point(flat)[0])
            })
            .collect()
    }
    fn floor(&self, n: usize) -> f64 {
        noise_threshold(n, self.max_abs)
    }
}

/// Classifies a function on a box from lattice-direction differences.
/// Steps along `e` have length `k Δx |e|`; the tables are indexed by `k Δx`
/// and each difference is rescaled to unit direction length before the sup.
pub fn classify_box(f: &BoxSampledFn, m: usize, options: &ClassifyOptions) -> Result<RegularityReport> {
    check_options(options)?;
    if f.dim() == 0 || f.dim() > 3 {
        return Err(Error::Dimension(format!("boxes of dimension 1..=3 only, got {}", f.dim())));
    }
    let span = f.shape.iter().copied().min().unwrap_or(1) - 1;
    let ks = capped(dyadic_multipliers(span, m + 2), f.spacing, options);
    if ks.len() < MIN_CLASSIFY_SCALES {
        return Err(Error::InsufficientScales {
            found: ks.len(),
            required: MIN_CLASSIFY_SCALES,
        });
    }
    let cube = Cube {
        f,
        directions: lattice_directions(f.dim()),
        max_abs: f.max_abs(),
    };
    let options = ClassifyOptions {
        derivative_route: false,
        ..options.clone()
    };
    let (verdicts, criteria) = assemble(m, &cube, &ks, &options, None);
    let main = criteria[0].clone();
    let hi = f.lo[0] + span as f64 * f.spacing;
    Ok(RegularityReport {
        function: None,
        interval: [f.lo[0], hi],
        spacing: f.spacing,
        order: m,
        statistic: main.statistic.clone(),
        scales: main.scales.clone(),
        exponent: main.growth,
        residual: None,
        window: None,
        saturated: false,
        criteria,
        verdicts: Some(verdicts),
        witness: main.witness,
    })
}
