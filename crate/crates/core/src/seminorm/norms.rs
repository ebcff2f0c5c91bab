use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::Witness;
use super::{ModulusSpec, SampledFn, ScaleSet};
use crate::error::{Error, Result};
use crate::scalar::binomial;

/// A grid supremum together with the pair attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub value: f64,
    pub witness: Option<Witness>,
}

/// Signed binomial weights of `Δ^n`, lowest node first.
pub(crate) fn difference_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|r| {
            let sign = if (n - r).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(n, r) as f64
        })
        .collect()
}

/// `max_j |Δ^n_{kΔx} f(x_j)|` over `j ∈ [i0, i1 - n k]`; first (smallest `j`) maximum wins.
pub(crate) fn max_difference(values: &[f64], i0: usize, i1: usize, n: usize, k: usize) -> Option<(f64, usize)> {
    if i1 < i0 + n * k {
        return None;
    }
    let last = i1 - n * k;
    let mut best = (-1.0, i0);
    match n {
        1 => {
            for j in i0..=last {
                let d = (values[j + k] - values[j]).abs();
                if d > best.0 {
                    best = (d, j);
                }
            }
        }
        2 => {
            for j in i0..=last {
                let d = (values[j + 2 * k] - 2.0 * values[j + k] + values[j]).abs();
                if d > best.0 {
                    best = (d, j);
                }
            }
        }
        _ => {
            let w = difference_weights(n);
            for j in i0..=last {
                let d = w
                    .iter()
                    .enumerate()
                    .map(|(r, c)| c * values[j + r * k])
                    .sum::<f64>()
                    .abs();
                if d > best.0 {
                    best = (d, j);
                }
            }
        }
    }
    Some(best)
}

/// Deterministic arg-max: larger value, then smaller `x`, then smaller `h`.
pub(crate) fn better(a: &Witness, b: &Witness) -> bool {
    a.value > b.value || (a.value == b.value && (a.x < b.x || (a.x == b.x && a.h < b.h)))
}

/// `sup |Δ^n_h f(x)| / denom(h)` over the given step multipliers. For
/// `centered` differences the witness `x` is the middle node.
pub(crate) fn sup_quotient(
    f: &SampledFn,
    i0: usize,
    i1: usize,
    ks: &[usize],
    n: usize,
    centered: bool,
    denom: &(dyn Fn(f64) -> f64 + Sync),
) -> Option<Witness> {
    let per_scale: Vec<Option<Witness>> = ks
        .par_iter()
        .map(|&k| {
            let (d, j) = max_difference(&f.values, i0, i1, n, k)?;
            let h = k as f64 * f.spacing;
            let centre = if centered { j + (n / 2) * k } else { j };
            Some(Witness {
                x: f.x(centre),
                h,
                value: d / denom(h),
            })
        })
        .collect();
    per_scale.into_iter().flatten().fold(None, |acc, w| match acc {
        Some(a) if !better(&w, &a) => Some(a),
        _ => Some(w),
    })
}

fn admissible(f: &SampledFn, k_interval: (f64, f64), n: usize) -> Result<(usize, usize, usize)> {
    let (a, b) = k_interval;
    let (i0, i1) = f.index_range(a, b)?;
    let k_max = (i1 - i0) / n;
    if k_max == 0 {
        return Err(Error::EmptyAdmissibleSet(format!(
            "[{a}, {b}] is shorter than {n} grid cells of width {}",
            f.spacing
        )));
    }
    Ok((i0, i1, k_max))
}

/// `sup |f(x+h) - 2f(x) + f(x-h)| / h` over grid pairs with `x ± h ∈ K`.
pub fn zygmund_seminorm(f: &SampledFn, k_interval: (f64, f64), scales: ScaleSet) -> Result<SupResult> {
    let (i0, i1, k_max) = admissible(f, k_interval, 2)?;
    let ks = scales.steps(k_max);
    let w = sup_quotient(f, i0, i1, &ks, 2, true, &|h| h);
    Ok(SupResult {
        value: w.map_or(0.0, |w| w.value),
        witness: w,
    })
}

/// `sup |f(x+h) - f(x)| / ω(h)` over grid pairs with `x, x+h ∈ K`.
pub fn holder_seminorm(
    f: &SampledFn,
    modulus: ModulusSpec,
    k_interval: (f64, f64),
    scales: ScaleSet,
) -> Result<SupResult> {
    modulus.validate()?;
    let (i0, i1, k_max) = admissible(f, k_interval, 1)?;
    let cap = modulus.max_step();
    let ks: Vec<usize> = scales
        .steps(k_max)
        .into_iter()
        .filter(|&k| (k as f64 * f.spacing) < cap)
        .collect();
    if ks.is_empty() {
        return Err(Error::EmptyAdmissibleSet("no step lies in the modulus range".into()));
    }
    let w = sup_quotient(f, i0, i1, &ks, 1, false, &|h| modulus.eval(h));
    Ok(SupResult {
        value: w.map_or(0.0, |w| w.value),
        witness: w,
    })
}

fn whole(f: &SampledFn) -> (f64, f64) {
    (f.lo, f.hi())
}

/// Grid value of `‖f‖_{Λ_s}` on the sampled interval, using the recursion
/// `‖f‖_{Λ_s} = ‖f‖_{Λ_{s-1}} + ‖f'‖_{Λ_{s-1}}` for `s > 1`.
pub fn lambda_norm(f: &SampledFn, s: f64, scales: ScaleSet) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ParameterRange(format!("lambda_norm needs s > 0, got {s}")));
    }
    if s > 1.0 {
        let needed = s.ceil() as usize - 1;
        if f.derivative_order() < needed {
            return Err(Error::MissingDerivative {
                order: needed,
                available: f.derivative_order(),
            });
        }
        return Ok(lambda_norm(f, s - 1.0, scales)? + lambda_norm(&f.derivative_view(1)?, s - 1.0, scales)?);
    }
    let sup = f.max_abs(0, f.len() - 1);
    let semi = if s == 1.0 {
        zygmund_seminorm(f, whole(f), scales)?
    } else {
        holder_seminorm(f, ModulusSpec::Power(s), whole(f), scales)?
    };
    Ok(sup + semi.value)
}

/// Grid value of `‖f‖_{Lip_s}` for integer `s ≥ 1`.
pub fn lip_norm(f: &SampledFn, s: usize, scales: ScaleSet) -> Result<f64> {
    if s == 0 {
        return Err(Error::ParameterRange("lip_norm needs s >= 1".into()));
    }
    if s > 1 {
        if f.derivative_order() < s - 1 {
            return Err(Error::MissingDerivative {
                order: s - 1,
                available: f.derivative_order(),
            });
        }
        return Ok(lip_norm(f, s - 1, scales)? + lip_norm(&f.derivative_view(1)?, s - 1, scales)?);
    }
    let sup = f.max_abs(0, f.len() - 1);
    Ok(sup + holder_seminorm(f, ModulusSpec::Power(1.0), whole(f), scales)?.value)
}
