use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::curve::{check_curve_domain, BoxDomain, Curve, PolyCurve, SmoothCurve};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Fraction of the half-width used by generated curves, keeping them off the boundary.
pub const FILL: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FamilyCurve {
    Polynomial { curve: PolyCurve },
    Stitched { curve: SmoothCurve },
}

impl Curve for FamilyCurve {
    fn dim(&self) -> usize {
        match self {
            FamilyCurve::Polynomial { curve } => curve.dim(),
            FamilyCurve::Stitched { curve } => curve.dim(),
        }
    }
    fn jets(&self, t: f64, order: usize) -> Vec<Jet> {
        match self {
            FamilyCurve::Polynomial { curve } => curve.jets(t, order),
            FamilyCurve::Stitched { curve } => curve.jets(t, order),
        }
    }
    fn point(&self, t: f64) -> Vec<f64> {
        match self {
            FamilyCurve::Polynomial { curve } => curve.point(t),
            FamilyCurve::Stitched { curve } => curve.point(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub id: String,
    pub kind: String,
    pub curve: FamilyCurve,
    pub interval: [f64; 2],
}

/// Reproducible set of test curves inside a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub seed: u64,
    pub members: Vec<FamilyMember>,
}

impl CurveFamily {
    /// `count` random polynomial curves of the given degree on `t ∈ [-1, 1]`.
    ///
    /// Coordinate `i` is `mid_i + 0.9 · half_i · p(t) / Σ|a_k|` with the
    /// coefficients `a_k` of `p` uniform in `[-1, 1]`, so every curve stays in
    /// the box.
    pub fn random_polynomials(seed: u64, count: usize, degree: usize, domain: &BoxDomain) -> Result<Self> {
        if degree == 0 {
            return Err(Error::ParameterRange("curves need degree at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut members = Vec::with_capacity(count);
        for c in 0..count {
            let coeffs = (0..domain.dim())
                .map(|i| {
                    let a: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    let norm: f64 = a.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
                    let (mid, half) = (0.5 * (domain.lo[i] + domain.hi[i]), 0.5 * (domain.hi[i] - domain.lo[i]));
                    let mut p: Vec<f64> = a.iter().map(|x| FILL * half * x / norm).collect();
                    p[0] += mid;
                    p
                })
                .collect();
            let curve = PolyCurve::new(coeffs)?;
            check_curve_domain(&curve, (-1.0, 1.0), domain, 257)?;
            members.push(FamilyMember {
                id: format!("poly-{c:02}"),
                kind: "polynomial".into(),
                curve: FamilyCurve::Polynomial { curve },
                interval: [-1.0, 1.0],
            });
        }
        Ok(Self { seed, members })
    }

    /// Adds the coordinate lines `t ↦ p + t r e_j` through `p`, scaled to stay in the box.
    pub fn push_coordinate_lines(&mut self, through: &[f64], domain: &BoxDomain) -> Result<()> {
        if !domain.contains(through) {
            return Err(Error::DomainEscape(f64::NAN));
        }
        let half: Vec<f64> = domain.lo.iter().zip(&domain.hi).map(|(a, b)| 0.5 * (b - a)).collect();
        for j in 0..domain.dim() {
            let room = (through[j] - domain.lo[j]).min(domain.hi[j] - through[j]);
            // a line pinned at a face still gets a usable one-sided reach
            let r = if room > 1e-3 * half[j] { FILL * room } else { FILL * half[j] };
            let mut velocity = vec![0.0; domain.dim()];
            velocity[j] = r;
            let curve = PolyCurve::affine(through, &velocity)?;
            let interval = if room > 1e-3 * half[j] {
                [-1.0, 1.0]
            } else if through[j] <= domain.lo[j] + room {
                [0.0, 1.0]
            } else {
                [-1.0, 0.0]
            };
            self.members.push(FamilyMember {
                id: format!("line-{j}"),
                kind: "line".into(),
                curve: FamilyCurve::Polynomial { curve },
                interval,
            });
        }
        Ok(())
    }

    pub fn push(&mut self, member: FamilyMember) {
        self.members.push(member);
    }
}
