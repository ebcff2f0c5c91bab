use serde::{Deserialize, Serialize};

use super::curve::{stitch_curves, BoxDomain, Curve, PolyCurve, SmoothCurve};
use crate::corpus::AnalyticFn;
use crate::error::{Error, Result};
use crate::seminorm::Criterion;

/// Extra halvings tried below `4^-n` when looking for a large quotient.
pub const MAX_REFINE: u32 = 40;
/// Candidate points per side on the local search grid.
pub const LOCAL_POINTS: i64 = 64;

/// A pair `(x_n, h_n)` with its difference quotient `q_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub n: u32,
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub q: f64,
    /// `q_n ≥ n 2^{nα}` was reached; otherwise the pair is the best found.
    pub reached_target: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(x: &[f64], a: f64, h: &[f64]) -> Vec<f64> {
    x.iter().zip(h).map(|(x, h)| x + a * h).collect()
}

/// Exponent `α` in `q_n / 2^{nα}`: 1 for Zygmund and Lipschitz.
pub fn criterion_exponent(criterion: Criterion) -> f64 {
    match criterion {
        Criterion::Zygmund | Criterion::Lipschitz => 1.0,
        Criterion::Holder(a) => a,
    }
}

/// Second difference over `|h|` (Zygmund) or first difference over `|h|^α`.
pub fn quotient(f: &AnalyticFn, x: &[f64], h: &[f64], criterion: Criterion) -> Result<f64> {
    let n = norm(h);
    let f0 = f.eval_point(x)?;
    let fp = f.eval_point(&axpy(x, 1.0, h))?;
    Ok(match criterion {
        Criterion::Zygmund => (fp - 2.0 * f0 + f.eval_point(&axpy(x, -1.0, h))?).abs() / n,
        c => (fp - f0).abs() / n.powf(criterion_exponent(c)),
    })
}

/// Composite statistic of `F = f∘c` at `t` and step `s`, matching [`quotient`].
pub fn composite_quotient<C: Curve + ?Sized>(f: &AnalyticFn, c: &C, t: f64, s: f64, criterion: Criterion) -> Result<f64> {
    let ev = |t: f64| f.eval_point(&c.point(t));
    Ok(match criterion {
        Criterion::Zygmund => (ev(t + s)? - 2.0 * ev(t)? + ev(t - s)?).abs() / s,
        cr => (ev(t + s)? - ev(t)?).abs() / s.powf(criterion_exponent(cr)),
    })
}

/// Witness pairs for `n = 1..=terms` and their limit point.
///
/// Step `n` searches `x_n` on the grid `x_{n-1} + k η` with `|k η| ≤ 4^-n`
/// (at most [`LOCAL_POINTS`] nodes per side), `h_n = η e` and
/// `η = 4^-n 2^-j`, taking the first `j` whose best quotient reaches
/// `n 2^{nα}`, or the best pair over all `j ≤` [`MAX_REFINE`]. The limit is the last `x_n`, so `|x_n - limit| ≤ 4^-n / 3`.
pub fn select_witnesses(
    f: &AnalyticFn,
    start: &[f64],
    direction: &[f64],
    criterion: Criterion,
    terms: u32,
    domain: &BoxDomain,
) -> Result<(Vec<f64>, Vec<WitnessPair>)> {
    let len = norm(direction);
    if len == 0.0 || direction.len() != start.len() {
        return Err(Error::Dimension("witness direction must be a nonzero vector in the domain's space".into()));
    }
    let e: Vec<f64> = direction.iter().map(|v| v / len).collect();
    let alpha = criterion_exponent(criterion);
    let mut center = start.to_vec();
    let mut out = Vec::new();
    for n in 1..=terms {
        let radius = 0.25f64.powi(n as i32);
        let target = n as f64 * 2f64.powf(n as f64 * alpha);
        let mut found: Option<WitnessPair> = None;
        for j in 0..=MAX_REFINE {
            let eta = radius * 0.5f64.powi(j as i32);
            let h: Vec<f64> = e.iter().map(|v| v * eta).collect();
            let reach = 2i64.pow(j.min(30)).min(LOCAL_POINTS);
            for k in -reach..=reach {
                let x = axpy(&center, k as f64 * eta, &e);
                if !(domain.contains(&x) && domain.contains(&axpy(&x, 1.0, &h)) && domain.contains(&axpy(&x, -1.0, &h))) {
                    continue;
                }
                let q = quotient(f, &x, &h, criterion)?;
                if found.as_ref().is_none_or(|b| q > b.q) {
                    found = Some(WitnessPair {
                        n,
                        x,
                        h: h.clone(),
                        q,
                        reached_target: q >= target,
                    });
                }
            }
            if found.as_ref().is_some_and(|p| p.reached_target) {
                break;
            }
        }
        let p = found.ok_or_else(|| Error::Normalization(format!("no admissible pair for n = {n} inside the domain")))?;
        center = p.x.clone();
        out.push(p);
    }
    Ok((center, out))
}

/// Curve with `c(t) = x_n + (t - t_n) h_n / (2^n |h_n|)` on `|t - t_n| ≤ 2^n |h_n|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialCurve {
    pub limit: Vec<f64>,
    pub curve: SmoothCurve,
    /// `(n, t_n, s_n)` per window.
    pub windows: Vec<(u32, f64, f64)>,
}

/// Builds the adversarial curve from pairs converging to `limit`.
///
/// Requires `|x_n - limit| ≤ 4^-n` and `0 < |h_n| ≤ 4^-n`. The fallback
/// point is `limit`.
pub fn adversarial_curve(limit: &[f64], pairs: &[WitnessPair], domain: Option<&BoxDomain>) -> Result<AdversarialCurve> {
    if pairs.is_empty() {
        return Err(Error::ParameterRange("at least one pair is required".into()));
    }
    let mut segments = Vec::new();
    let mut widths = Vec::new();
    for p in pairs {
        let bound = 0.25f64.powi(p.n as i32) * (1.0 + 1e-12);
        let hn = norm(&p.h);
        if p.x.len() != limit.len() || p.h.len() != limit.len() {
            return Err(Error::Dimension(format!("pair {} has the wrong dimension", p.n)));
        }
        let dist = norm(&axpy(&p.x, -1.0, limit));
        if !(hn > 0.0 && hn <= bound && dist <= bound) {
            return Err(Error::ParameterRange(format!(
                "pair {} violates |x_n - x| <= 4^-n or 0 < |h_n| <= 4^-n",
                p.n
            )));
        }
        let scale = 2f64.powi(p.n as i32);
        let velocity: Vec<f64> = p.h.iter().map(|v| v / (scale * hn)).collect();
        segments.push(PolyCurve::affine(&p.x, &velocity)?);
        widths.push(scale * hn);
    }
    let curve = stitch_curves(segments, &widths, None, Some(limit.to_vec()), domain)?;
    let windows = pairs
        .iter()
        .zip(&curve.pieces)
        .map(|(p, piece)| (p.n, piece.anchor, piece.half_width))
        .collect();
    Ok(AdversarialCurve {
        limit: limit.to_vec(),
        curve,
        windows,
    })
}

/// Composite statistic against `q_n / 2^{nα}` for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub n: u32,
    pub t: f64,
    pub s: f64,
    pub q: f64,
    pub composite: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

/// Checks the rescaling identity window by window.
pub fn rescaling_identity(
    f: &AnalyticFn,
    adv: &AdversarialCurve,
    pairs: &[WitnessPair],
    criterion: Criterion,
) -> Result<Vec<IdentityRow>> {
    let alpha = criterion_exponent(criterion);
    adv.windows
        .iter()
        .zip(pairs)
        .map(|(&(n, t, s), p)| {
            let composite = composite_quotient(f, &adv.curve, t, s, criterion)?;
            let predicted = p.q / 2f64.powf(n as f64 * alpha);
            let relative_error = (composite - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE);
            Ok(IdentityRow {
                n,
                t,
                s,
                q: p.q,
                composite,
                predicted,
                relative_error,
            })
        })
        .collect()
}
