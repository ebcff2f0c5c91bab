use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::Polynomial;
use crate::jet::{smooth_step, Jet};

pub const MAX_PIECES: usize = 64;
pub const MAX_CURVE_DERIVATIVE: usize = 4;
/// Tolerance on derivative jumps across transitions.
pub const TOL_STITCH: f64 = 1e-6;
/// Probe spacing for continuity sweeps.
pub const PROBE_SPACING: f64 = 1e-6;

/// Axis-aligned box `U = Π [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Dimension("box needs matching bounds with lo < hi".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(lo: f64, hi: f64, d: usize) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| a <= x && x <= b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

/// Anything that can hand out coordinate jets `c_i(t + ·)` up to a given order.
pub trait Curve: Sync {
    fn dim(&self) -> usize;
    fn jets(&self, t: f64, order: usize) -> Vec<Jet>;

    /// The `order`-th derivative vector at `t`.
    fn eval_curve(&self, t: f64, order: usize) -> Vec<f64> {
        self.jets(t, order).iter().map(|j| j.derivative(order)).collect()
    }

    fn point(&self, t: f64) -> Vec<f64> {
        self.eval_curve(t, 0)
    }
}

/// Polynomial curve, `coeffs[axis][power]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCurve {
    pub coeffs: Vec<Vec<f64>>,
}

impl PolyCurve {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| c.is_empty()) {
            return Err(Error::Dimension("a curve needs at least one nonempty coordinate".into()));
        }
        Ok(Self { coeffs })
    }

    /// `τ ↦ point + τ · velocity`.
    pub fn affine(point: &[f64], velocity: &[f64]) -> Result<Self> {
        if point.len() != velocity.len() {
            return Err(Error::Dimension("point and velocity differ in length".into()));
        }
        Self::new(point.iter().zip(velocity).map(|(p, v)| vec![*p, *v]).collect())
    }

    fn coordinate_jet(c: &[f64], tau: f64, order: usize) -> Jet {
        let p = Polynomial::new(c.to_vec());
        let derivs: Vec<f64> = (0..=order).map(|k| p.nth_derivative(k).value(&tau)).collect();
        Jet::from_derivatives(&derivs)
    }
}

impl Curve for PolyCurve {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }
    fn jets(&self, t: f64, order: usize) -> Vec<Jet> {
        self.coeffs.iter().map(|c| Self::coordinate_jet(c, t, order)).collect()
    }
    fn point(&self, t: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.iter().rev().fold(0.0, |acc, a| acc * t + a))
            .collect()
    }
}

/// A window `[anchor - half_width, anchor + half_width]` on which the curve
/// equals `segment(t - anchor)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub anchor: f64,
    pub half_width: f64,
    pub segment: PolyCurve,
}

impl Piece {
    pub fn left(&self) -> f64 {
        self.anchor - self.half_width
    }
    pub fn right(&self) -> f64 {
        self.anchor + self.half_width
    }
}

/// A C^∞ curve through finitely many exact windows. Between windows the
/// polynomial continuation of the left segment is blended into the right
/// segment with a flat smooth step; before the first and after the last
/// window the curve blends into a constant fallback point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothCurve {
    pub pieces: Vec<Piece>,
    /// Width of the lead-in blend before the first window.
    pub lead: f64,
    /// Width of the trail-out blend after the last window.
    pub trail: f64,
    pub fallback: Vec<f64>,
}

enum Region {
    Window(usize),
    Gap(usize),
    Lead,
    Trail,
    Outside,
}

impl SmoothCurve {
    pub fn validate(&self) -> Result<()> {
        let n = self.pieces.len();
        if n == 0 || n > MAX_PIECES {
            return Err(Error::ParameterRange(format!("1..={MAX_PIECES} pieces required, got {n}")));
        }
        let d = self.fallback.len();
        for (i, p) in self.pieces.iter().enumerate() {
            if !(p.half_width > 0.0 && p.half_width.is_finite() && p.anchor.is_finite()) {
                return Err(Error::ParameterRange(format!("piece {i} needs a positive finite half-width")));
            }
            if p.segment.dim() != d {
                return Err(Error::Dimension(format!("piece {i} has dimension {} not {d}", p.segment.dim())));
            }
        }
        for i in 1..n {
            if self.pieces[i - 1].right() >= self.pieces[i].left() {
                return Err(Error::OverlappingWindows(i - 1, i));
            }
        }
        if !(self.lead > 0.0 && self.trail > 0.0) {
            return Err(Error::ParameterRange("transition widths must be positive".into()));
        }
        Ok(())
    }

    /// Parameter interval outside of which the curve is constant.
    pub fn t_range(&self) -> (f64, f64) {
        let first = &self.pieces[0];
        let last = &self.pieces[self.pieces.len() - 1];
        (first.left() - self.lead, last.right() + self.trail)
    }

    fn region(&self, t: f64) -> Region {
        let (start, end) = self.t_range();
        if t <= start || t >= end {
            return Region::Outside;
        }
        // last piece whose left edge is <= t
        let idx = self.pieces.partition_point(|p| p.left() <= t);
        if idx == 0 {
            return Region::Lead;
        }
        let i = idx - 1;
        if t <= self.pieces[i].right() {
            Region::Window(i)
        } else if i + 1 < self.pieces.len() {
            Region::Gap(i)
        } else {
            Region::Trail
        }
    }

    fn segment_jets(&self, i: usize, t: f64, order: usize) -> Vec<Jet> {
        let p = &self.pieces[i];
        p.segment.jets(t - p.anchor, order)
    }

    fn constant_jets(&self, order: usize) -> Vec<Jet> {
        self.fallback.iter().map(|&c| Jet::constant(c, order)).collect()
    }

    /// `from + S(u) (to - from)` with `u = (t - a) / width`.
    fn blend(from: &[Jet], to: &[Jet], t: f64, a: f64, width: f64, order: usize) -> Vec<Jet> {
        let u = Jet::variable(t, order).add_const(-a).scale(1.0 / width);
        let s = smooth_step(&u);
        from.iter().zip(to).map(|(f, g)| f + &(&s * &(g - f))).collect()
    }

    /// Coordinate jets from the formula governing piece/gap `region`.
    fn jets_in(&self, region: Region, t: f64, order: usize) -> Vec<Jet> {
        match region {
            Region::Window(i) => self.segment_jets(i, t, order),
            Region::Gap(i) => {
                let (r, l) = (self.pieces[i].right(), self.pieces[i + 1].left());
                let left = self.segment_jets(i, t, order);
                let right = self.segment_jets(i + 1, t, order);
                Self::blend(&left, &right, t, r, l - r, order)
            }
            Region::Lead => {
                let l = self.pieces[0].left();
                let seg = self.segment_jets(0, t, order);
                Self::blend(&self.constant_jets(order), &seg, t, l - self.lead, self.lead, order)
            }
            Region::Trail => {
                let last = self.pieces.len() - 1;
                let r = self.pieces[last].right();
                let seg = self.segment_jets(last, t, order);
                Self::blend(&seg, &self.constant_jets(order), t, r, self.trail, order)
            }
            Region::Outside => self.constant_jets(order),
        }
    }

    /// Every transition boundary with the regions on either side.
    fn boundaries(&self) -> Vec<(f64, Region, Region)> {
        let n = self.pieces.len();
        let mut out = Vec::new();
        let (start, end) = self.t_range();
        out.push((start, Region::Outside, Region::Lead));
        out.push((self.pieces[0].left(), Region::Lead, Region::Window(0)));
        for i in 0..n {
            let after = if i + 1 < n { Region::Gap(i) } else { Region::Trail };
            out.push((self.pieces[i].right(), Region::Window(i), after));
            if i + 1 < n {
                out.push((self.pieces[i + 1].left(), Region::Gap(i), Region::Window(i + 1)));
            }
        }
        out.push((end, Region::Trail, Region::Outside));
        out
    }

    /// Smallest transition width (gap, lead or trail).
    pub fn min_transition(&self) -> f64 {
        let gaps = self.pieces.windows(2).map(|w| w[1].left() - w[0].right());
        gaps.fold(self.lead.min(self.trail), f64::min)
    }

    /// Jumps of `c^(k)`, `k ≤ 4`, at every transition boundary.
    ///
    /// `exact_jump` compares the formulas of the two adjacent regions at the
    /// boundary itself. `probe_jump` extrapolates each side to the boundary
    /// quadratically from three probes spaced [`PROBE_SPACING`] apart (or a
    /// thousandth of the narrowest transition, whichever is smaller).
    pub fn continuity_report(&self) -> ContinuityReport {
        let delta = PROBE_SPACING.min(self.min_transition() / 1000.0);
        let order = MAX_CURVE_DERIVATIVE;
        let mut rows = Vec::new();
        for (b, left, right) in self.boundaries() {
            let l_exact = self.jets_in(left, b, order);
            let r_exact = self.jets_in(right, b, order);
            let side = |sign: f64| -> Vec<Vec<f64>> {
                (1..=3)
                    .map(|j| {
                        let t = b + sign * j as f64 * delta;
                        let jets = self.jets(t, order);
                        (0..=order)
                            .flat_map(|k| jets.iter().map(move |jt| jt.derivative(k)))
                            .collect()
                    })
                    .collect()
            };
            let (lp, rp) = (side(-1.0), side(1.0));
            let mut exact_jump = [0.0; MAX_CURVE_DERIVATIVE + 1];
            let mut probe_jump = [0.0; MAX_CURVE_DERIVATIVE + 1];
            let d = self.fallback.len();
            for k in 0..=order {
                for a in 0..d {
                    let e = (l_exact[a].derivative(k) - r_exact[a].derivative(k)).abs();
                    exact_jump[k] = f64::max(exact_jump[k], e);
                    let idx = k * d + a;
                    let extrap = |p: &Vec<Vec<f64>>| 3.0 * p[0][idx] - 3.0 * p[1][idx] + p[2][idx];
                    let pj = (extrap(&lp) - extrap(&rp)).abs();
                    probe_jump[k] = f64::max(probe_jump[k], pj);
                }
            }
            rows.push(BoundaryCheck {
                t: b,
                exact_jump,
                probe_jump,
            });
        }
        let max_exact = rows.iter().flat_map(|r| r.exact_jump).fold(0.0, f64::max);
        let max_probe = rows.iter().flat_map(|r| r.probe_jump).fold(0.0, f64::max);
        ContinuityReport {
            probe_spacing: delta,
            boundaries: rows,
            max_exact_jump: max_exact,
            max_probe_jump: max_probe,
            passed: max_exact <= TOL_STITCH && max_probe <= TOL_STITCH,
        }
    }

    /// Probe-based check that the curve stays in `domain`.
    pub fn check_domain(&self, domain: &BoxDomain, probes: usize) -> Result<()> {
        check_curve_domain(self, self.t_range(), domain, probes)?;
        for p in &self.pieces {
            check_curve_domain(self, (p.left(), p.right()), domain, 64)?;
        }
        Ok(())
    }
}

/// Probe-based domain check of any curve on `[a, b]`.
pub fn check_curve_domain<C: Curve + ?Sized>(c: &C, (a, b): (f64, f64), domain: &BoxDomain, probes: usize) -> Result<()> {
    let probes = probes.max(2);
    for i in 0..probes {
        let t = a + (b - a) * i as f64 / (probes - 1) as f64;
        if !domain.contains(&c.point(t)) {
            return Err(Error::DomainEscape(t));
        }
    }
    Ok(())
}

impl Curve for SmoothCurve {
    fn dim(&self) -> usize {
        self.fallback.len()
    }
    fn jets(&self, t: f64, order: usize) -> Vec<Jet> {
        self.jets_in(self.region(t), t, order)
    }
    fn point(&self, t: f64) -> Vec<f64> {
        match self.region(t) {
            Region::Window(i) => {
                let p = &self.pieces[i];
                p.segment.point(t - p.anchor)
            }
            r => self.jets_in(r, t, 0).iter().map(Jet::value).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    pub t: f64,
    pub exact_jump: [f64; MAX_CURVE_DERIVATIVE + 1],
    pub probe_jump: [f64; MAX_CURVE_DERIVATIVE + 1],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub probe_spacing: f64,
    pub boundaries: Vec<BoundaryCheck>,
    pub max_exact_jump: f64,
    pub max_probe_jump: f64,
    pub passed: bool,
}

/// Default anchors: `t_0 = 0`, `t_n = t_{n-1} + s_{n-1} + g_{n-1} + s_n` with gaps `g_j = s_j`.
pub fn default_anchors(widths: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(widths.len());
    let mut t = 0.0;
    for (i, s) in widths.iter().enumerate() {
        if i > 0 {
            t += 2.0 * widths[i - 1] + s;
        }
        out.push(t);
    }
    out
}

/// Stitches segments into one curve with exact windows.
///
/// Without anchors, [`default_anchors`] is used. The fallback point defaults
/// to the last segment's value at its anchor.
pub fn stitch_curves(
    segments: Vec<PolyCurve>,
    widths: &[f64],
    anchors: Option<&[f64]>,
    fallback: Option<Vec<f64>>,
    domain: Option<&BoxDomain>,
) -> Result<SmoothCurve> {
    if segments.len() != widths.len() || anchors.is_some_and(|a| a.len() != widths.len()) {
        return Err(Error::Dimension("segments, widths and anchors must have equal length".into()));
    }
    if segments.is_empty() {
        return Err(Error::ParameterRange("at least one segment is required".into()));
    }
    let anchors = anchors.map_or_else(|| default_anchors(widths), <[f64]>::to_vec);
    let d = segments[0].dim();
    let fallback = fallback.unwrap_or_else(|| segments[segments.len() - 1].point(0.0));
    let mut pieces: Vec<(usize, Piece)> = segments
        .into_iter()
        .zip(widths)
        .zip(anchors)
        .enumerate()
        .map(|(i, ((segment, &half_width), anchor))| {
            (
                i,
                Piece {
                    anchor,
                    half_width,
                    segment,
                },
            )
        })
        .collect();
    pieces.sort_by(|a, b| a.1.anchor.total_cmp(&b.1.anchor));
    for w in pieces.windows(2) {
        if w[0].1.right() >= w[1].1.left() {
            return Err(Error::OverlappingWindows(w[0].0.min(w[1].0), w[0].0.max(w[1].0)));
        }
    }
    let lead = pieces[0].1.half_width;
    let trail = pieces[pieces.len() - 1].1.half_width;
    let curve = SmoothCurve {
        pieces: pieces.into_iter().map(|(_, p)| p).collect(),
        lead,
        trail,
        fallback,
    };
    if curve.fallback.len() != d {
        return Err(Error::Dimension("fallback point has the wrong dimension".into()));
    }
    curve.validate()?;
    if let Some(u) = domain {
        curve.check_domain(u, 4096)?;
    }
    Ok(curve)
}
