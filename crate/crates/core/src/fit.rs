//! Least-squares line fits used for order certification and growth rates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y ≈ intercept + slope·x`. Needs at least two points.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        residual: (ss_res / nf).sqrt(),
        points: n,
    })
}

/// Absolute errors below this are treated as cancellation noise.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Fits `log2 |error|` against `log2 h`, dropping points under [`NOISE_FLOOR`].
pub fn fit_order(steps: &[f64], errors: &[f64]) -> Option<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = steps
        .iter()
        .zip(errors)
        .filter(|(_, e)| e.abs() >= NOISE_FLOOR && e.is_finite())
        .map(|(h, e)| (h.abs().log2(), e.abs().log2()))
        .unzip();
    linear_fit(&xs, &ys)
}

/// Dyadic steps `2^-hi_exp, …, 2^-lo_exp` from coarse to fine.
pub fn dyadic_steps(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    (lo_exp..=hi_exp).map(|k| 2f64.powi(-k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-15);
        assert!((fit.intercept - 1.0).abs() < 1e-15);
        assert!((fit.r_squared - 1.0).abs() < 1e-15);
    }

    #[test]
    fn order_of_power_law() {
        let hs = dyadic_steps(4, 12);
        let errs: Vec<f64> = hs.iter().map(|h| 3.0 * h.powi(4)).collect();
        let fit = fit_order(&hs, &errs).unwrap();
        assert!((fit.slope - 4.0).abs() < 1e-12);
        assert!(fit.points < hs.len());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit(&[1.0], &[2.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }
}
