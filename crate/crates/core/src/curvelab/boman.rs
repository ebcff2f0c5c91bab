use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adversarial::{adversarial_curve, rescaling_identity, select_witnesses, IdentityRow, WitnessPair};
use super::curve::{check_curve_domain, BoxDomain, Curve, SmoothCurve};
use super::family::{CurveFamily, FamilyCurve, FamilyMember};
use crate::corpus::{AnalyticFn, DerivedFn};
use crate::error::{Error, Result};
use crate::faa_di_bruno::compose_derivative;
use crate::output::to_canonical_json;
use crate::seminorm::{
    classify_box, classify_with, sample_box, ClassifyOptions, Criterion, Divergence, RegularityReport, SampledFn,
    Witness,
};

/// Samples `F = f∘c` and `F', …, F^(order)` on `points` nodes of `[a, b]`.
///
/// Derivatives of tensor functions are `Σ_i (f_i∘c_i)^(j)`, each term by the
/// one-dimensional Faà di Bruno formula.
pub fn compose<C: Curve + ?Sized>(
    f: &AnalyticFn,
    c: &C,
    (a, b): (f64, f64),
    points: usize,
    order: usize,
    domain: Option<&BoxDomain>,
) -> Result<SampledFn> {
    if c.dim() != f.dim() {
        return Err(Error::Dimension(format!("curve in R^{} for a function on R^{}", c.dim(), f.dim())));
    }
    if points < 2 || !(a < b) {
        return Err(Error::ParameterRange("composition needs a < b and two points".into()));
    }
    if let Some(u) = domain {
        check_curve_domain(c, (a, b), u, points)?;
    }
    let derived: Vec<Vec<DerivedFn>> = (0..f.dim())
        .map(|axis| {
            let g = f.factor(axis)?;
            (1..=order).map(|k| g.derivative_fn(k)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let dt = (b - a) / (points - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let t = if i + 1 == points { b } else { a + i as f64 * dt };
            let jets = c.jets(t, order);
            let p: Vec<f64> = jets.iter().map(|j| j.value()).collect();
            let mut row = vec![f.eval_point(&p)?; 1];
            for j in 1..=order {
                let mut s = 0.0;
                for (axis, jet) in jets.iter().enumerate() {
                    let inner = jet.derivatives();
                    let mut outer = vec![0.0];
                    outer.extend(derived[axis][..j].iter().map(|d| d.eval(p[axis])));
                    s += compose_derivative(&outer, &inner, j);
                }
                row.push(s);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let values = rows.iter().map(|r| r[0]).collect();
    let derivatives = (1..=order).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    SampledFn::with_derivatives(a, dt, values, derivatives)
}

fn default_curves() -> usize {
    32
}
fn default_degree() -> usize {
    3
}
fn default_direct_points() -> usize {
    513
}
fn default_composite_points() -> usize {
    (1 << 16) + 1
}
fn default_terms() -> u32 {
    12
}

/// Inputs of a Boman test run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BomanConfig {
    pub function: String,
    pub m: usize,
    pub criterion: Criterion,
    /// The cube `[lo, hi]^d`.
    pub domain: [f64; 2],
    pub seed: u64,
    #[serde(default = "default_curves")]
    pub curves: usize,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_direct_points")]
    pub direct_points: usize,
    #[serde(default = "default_composite_points")]
    pub composite_points: usize,
    /// Number of windows in the adversarial curve.
    #[serde(default = "default_terms")]
    pub adversarial_terms: u32,
}

impl BomanConfig {
    pub fn new(function: &str, m: usize, criterion: Criterion, domain: [f64; 2], seed: u64) -> Self {
        Self {
            function: function.to_string(),
            m,
            criterion,
            domain,
            seed,
            curves: default_curves(),
            degree: default_degree(),
            direct_points: default_direct_points(),
            composite_points: default_composite_points(),
            adversarial_terms: default_terms(),
        }
    }
}

/// Boundedness of one statistic table, condensed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub verdict: bool,
    pub growth: Option<f64>,
    pub divergence: Option<Divergence>,
    pub witness: Option<Witness>,
}

fn summarize(report: &RegularityReport, criterion: Criterion) -> Result<Assessment> {
    let verdicts = report
        .verdicts
        .as_ref()
        .ok_or_else(|| Error::Normalization("classification produced no verdicts".into()))?;
    let verdict = verdicts
        .get(criterion)
        .ok_or_else(|| Error::ParameterRange(format!("criterion {criterion} was not evaluated")))?;
    let table = report
        .criteria
        .iter()
        .find(|c| c.criterion == Some(criterion) && c.route == "difference");
    Ok(Assessment {
        verdict,
        growth: table.and_then(|t| t.growth),
        divergence: table.map(|t| t.divergence),
        witness: table.and_then(|t| t.witness),
    })
}

/// Composite scale tables stop at this fraction of the parameter interval.
///
/// Composites of self-similar functions approach their supremum from below
/// over the coarse parameter steps, which would otherwise read as growth.
pub const COMPOSITE_STEP_FRACTION: f64 = 1.0 / 64.0;

fn options_for(criterion: Criterion) -> ClassifyOptions {
    ClassifyOptions {
        holder_exponents: match criterion {
            Criterion::Holder(a) => vec![a],
            _ => Vec::new(),
        },
        derivative_route: false,
        max_step: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeResult {
    pub id: String,
    pub kind: String,
    pub assessment: Assessment,
}

/// Adversarial composite for a failing direct verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialReport {
    pub limit: Vec<f64>,
    pub direction: Vec<f64>,
    pub pairs: Vec<WitnessPair>,
    pub curve: SmoothCurve,
    pub identity: Vec<IdentityRow>,
    pub max_relative_error: f64,
    /// Composite statistic at window `n` is at least `n` for every window.
    pub grows: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BomanReport {
    pub config: BomanConfig,
    pub label: String,
    /// Ground truth from the corpus label.
    pub expected: bool,
    pub direct: Assessment,
    pub composites: Vec<CompositeResult>,
    pub adversarial: Option<AdversarialReport>,
    pub all_composites_bounded: bool,
    pub failing_composite_found: bool,
    /// Direct yes with every composite yes, or direct no with some composite no.
    pub agreement: bool,
}

impl BomanReport {
    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(self)
    }
}

/// Point and axis at which the direct classification fails: the failing
/// factor's one-dimensional witness, other coordinates at the box centre.
fn failure_site(f: &AnalyticFn, config: &BomanConfig, domain: &BoxDomain) -> Result<Option<(Vec<f64>, usize)>> {
    let [lo, hi] = config.domain;
    let options = options_for(config.criterion);
    for axis in 0..f.dim() {
        let g = f.factor(axis)?;
        let samples = crate::seminorm::sample_fn(&g, lo, hi, (1 << 12) + 1)?;
        let report = classify_with(&samples, config.m, (lo, hi), &options)?;
        let a = summarize(&report, config.criterion)?;
        if !a.verdict {
            let mut p = domain.center();
            if let Some(w) = a.witness {
                p[axis] = w.x;
            }
            return Ok(Some((p, axis)));
        }
    }
    Ok(None)
}

/// Compares the direct classification of `f` on a cube with
/// classifications of `f∘c` for a seeded curve family, coordinate lines and,
/// when the direct verdict fails at `m = 0`, an adversarial stitched curve.
pub fn boman_test(config: &BomanConfig) -> Result<BomanReport> {
    let f: AnalyticFn = config.function.parse()?;
    let [lo, hi] = config.domain;
    let domain = BoxDomain::cube(lo, hi, f.dim())?;
    let options = options_for(config.criterion);

    let direct = if f.dim() == 1 {
        let samples = crate::seminorm::sample_fn(&f, lo, hi, config.direct_points)?;
        classify_with(&samples, config.m, (lo, hi), &options)?
    } else {
        classify_box(&sample_box(&f, lo, hi, config.direct_points)?, config.m, &options)?
    };
    let direct = summarize(&direct, config.criterion)?;

    let mut family = CurveFamily::random_polynomials(config.seed, config.curves, config.degree, &domain)?;
    let site = if direct.verdict { None } else { failure_site(&f, config, &domain)? };
    let through = site.as_ref().map_or_else(|| domain.center(), |(p, _)| p.clone());
    family.push_coordinate_lines(&through, &domain)?;

    let mut adversarial = None;
    if let (Some((p, axis)), 0) = (&site, config.m) {
        let mut e = vec![0.0; f.dim()];
        e[*axis] = 1.0;
        let (limit, pairs) = select_witnesses(&f, p, &e, config.criterion, config.adversarial_terms, &domain)?;
        let adv = adversarial_curve(&limit, &pairs, Some(&domain))?;
        let identity = rescaling_identity(&f, &adv, &pairs, config.criterion)?;
        let max_relative_error = identity.iter().map(|r| r.relative_error).fold(0.0, f64::max);
        let grows = identity.iter().all(|r| r.composite >= r.n as f64);
        let (a, b) = adv.curve.t_range();
        family.push(FamilyMember {
            id: "adversarial".into(),
            kind: "adversarial".into(),
            curve: FamilyCurve::Stitched {
                curve: adv.curve.clone(),
            },
            interval: [a, b],
        });
        adversarial = Some(AdversarialReport {
            limit: adv.limit,
            direction: e,
            pairs,
            curve: adv.curve,
            identity,
            max_relative_error,
            grows,
        });
    }

    let composites = family
        .members
        .par_iter()
        .filter(|m| m.kind != "adversarial")
        .map(|member| {
            let (a, b) = (member.interval[0], member.interval[1]);
            let samples = compose(&f, &member.curve, (a, b), config.composite_points, 0, Some(&domain))?;
            let options = ClassifyOptions {
                max_step: Some((b - a) * COMPOSITE_STEP_FRACTION),
                ..options.clone()
            };
            let report = classify_with(&samples, config.m, (a, b), &options)?;
            Ok(CompositeResult {
                id: member.id.clone(),
                kind: member.kind.clone(),
                assessment: summarize(&report, config.criterion)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let all_composites_bounded =
        composites.iter().all(|c| c.assessment.verdict) && adversarial.as_ref().is_none_or(|a| !a.grows);
    let failing_composite_found = !all_composites_bounded;
    let agreement = if direct.verdict {
        all_composites_bounded
    } else {
        failing_composite_found
    };
    Ok(BomanReport {
        config: config.clone(),
        label: f.label().to_string(),
        expected: f.label().expected(config.m, config.criterion),
        direct,
        composites,
        adversarial,
        all_composites_bounded,
        failing_composite_found,
        agreement,
    })
}
