use rayon::prelude::*;

use super::norms::max_difference;
use super::report::{RegularityReport, ScaleRow, Witness};
use super::{SampledFn, MIN_STEP_CELLS};
use crate::error::{Error, Result};
use crate::fit::linear_fit;

pub const MIN_ESTIMATE_SCALES: usize = 4;
/// Largest spread of local slopes inside a plateau window.
pub const PLATEAU_SPREAD: f64 = 0.15;
/// Exponents within this margin of `n` are flagged as saturated.
pub const SATURATION_MARGIN: f64 = 0.1;

/// Rounding floor for `|Δ^n f|` given the sampled magnitude.
pub(crate) fn noise_threshold(n: usize, max_abs: f64) -> f64 {
    2f64.powi(n as i32) * 64.0 * f64::EPSILON * max_abs
}

/// Dyadic multipliers `k = 4, 8, …` with `n k ≤ span`.
pub(crate) fn dyadic_multipliers(span: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = MIN_STEP_CELLS;
    while n * k <= span {
        out.push(k);
        k *= 2;
    }
    out.reverse();
    out
}

/// Per-scale `sup_x |Δ^n_h f(x)|` over nodes in `[i0, i1]`, coarse to fine.
pub(crate) fn difference_table(f: &SampledFn, i0: usize, i1: usize, n: usize, ks: &[usize]) -> Vec<(f64, usize)> {
    ks.par_iter()
        .map(|&k| max_difference(&f.values, i0, i1, n, k).expect("multipliers fit the interval"))
        .collect()
}

/// Longest run of consecutive usable scales whose local slopes spread by
/// less than [`PLATEAU_SPREAD`]; ties go to the finer run.
fn plateau(xs: &[f64], ys: &[f64]) -> Option<(usize, usize)> {
    let n = xs.len();
    if n < MIN_ESTIMATE_SCALES {
        return None;
    }
    let slopes: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
    let mut best: Option<(usize, usize)> = None;
    for start in 0..slopes.len() {
        let (mut lo, mut hi) = (slopes[start], slopes[start]);
        let mut end = start;
        while end + 1 < slopes.len() {
            let s = slopes[end + 1];
            if hi.max(s) - lo.min(s) >= PLATEAU_SPREAD {
                break;
            }
            lo = lo.min(s);
            hi = hi.max(s);
            end += 1;
        }
        // scales start..=end+1
        let len = end + 2 - start;
        let better = match best {
            None => true,
            Some((a, b)) => len >= b + 1 - a,
        };
        if len >= MIN_ESTIMATE_SCALES && better {
            best = Some((start, end + 1));
        }
    }
    best
}

/// Fits `log M(h)` against `log h`, `M(h) = sup_x |Δ^n_h f(x)|`, over the
/// plateau window of dyadic scales inside `K`.
pub fn estimate_exponent(f: &SampledFn, n: usize, k_interval: (f64, f64)) -> Result<RegularityReport> {
    if n == 0 {
        return Err(Error::ParameterRange("difference order must be at least 1".into()));
    }
    let (i0, i1) = f.index_range(k_interval.0, k_interval.1)?;
    let ks = dyadic_multipliers(i1 - i0, n);
    let table = difference_table(f, i0, i1, n, &ks);
    let floor = noise_threshold(n, f.max_abs(i0, i1));
    let scales: Vec<ScaleRow> = ks
        .iter()
        .zip(&table)
        .map(|(&k, &(m, j))| ScaleRow {
            h: k as f64 * f.spacing,
            statistic: m,
            witness_x: f.x(j),
            noise: m <= floor,
        })
        .collect();
    let usable: Vec<usize> = (0..scales.len()).filter(|&i| !scales[i].noise).collect();
    if usable.len() < MIN_ESTIMATE_SCALES {
        return Err(Error::InsufficientScales {
            found: usable.len(),
            required: MIN_ESTIMATE_SCALES,
        });
    }
    let xs: Vec<f64> = usable.iter().map(|&i| scales[i].h.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|&i| scales[i].statistic.ln()).collect();
    // longest run of consecutive usable scales
    let (a, b) = plateau(&xs, &ys).unwrap_or((0, xs.len() - 1));
    let fit = linear_fit(&xs[a..=b], &ys[a..=b]).ok_or(Error::InsufficientScales {
        found: b + 1 - a,
        required: MIN_ESTIMATE_SCALES,
    })?;
    let witness = scales
        .iter()
        .filter(|r| !r.noise)
        .map(|r| Witness {
            x: r.witness_x,
            h: r.h,
            value: r.statistic,
        })
        .next_back();
    Ok(RegularityReport {
        function: None,
        interval: [k_interval.0, k_interval.1],
        spacing: f.spacing,
        order: n,
        statistic: format!("sup |Δ^{n}_h f|"),
        scales,
        exponent: Some(fit.slope),
        residual: Some(fit.residual),
        window: Some([usable[a], usable[b]]),
        saturated: fit.slope >= n as f64 - SATURATION_MARGIN,
        criteria: Vec::new(),
        verdicts: None,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seminorm::sample_fn;

    #[test]
    fn plateau_prefers_longest_then_finest() {
        let xs: Vec<f64> = (0..8).map(|i| -(i as f64)).collect();
        // slope 1 for the first four scales, slope 2 for the last four
        let ys: Vec<f64> = (0..8).map(|i| if i < 4 { -(i as f64) } else { -3.0 - 2.0 * (i - 3) as f64 }).collect();
        assert_eq!(plateau(&xs, &ys), Some((3, 7)));
    }

    #[test]
    fn sqrt_exponent() {
        let f = sample_fn(&|x: f64| x.abs().sqrt(), -1.0, 1.0, 4097).unwrap();
        let r = estimate_exponent(&f, 1, (-1.0, 1.0)).unwrap();
        assert!((r.exponent.unwrap() - 0.5).abs() < 0.05);
        assert!(!r.saturated);
        assert!(r.scales.windows(2).all(|w| w[0].h > w[1].h));
    }

    #[test]
    fn smooth_saturates() {
        let f = sample_fn(&f64::sin, -1.0, 1.0, 4097).unwrap();
        let r = estimate_exponent(&f, 2, (-1.0, 1.0)).unwrap();
        assert!(r.saturated);
    }

    #[test]
    fn too_few_scales() {
        let f = sample_fn(&f64::sin, -1.0, 1.0, 17).unwrap();
        assert!(matches!(
            estimate_exponent(&f, 1, (-1.0, 1.0)),
            Err(Error::InsufficientScales { .. })
        ));
    }
}
