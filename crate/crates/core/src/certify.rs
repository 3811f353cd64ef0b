//! Checks of the harmonic-measure characterisation of rational lemniscates
//! on a graph with candidate points, and the Jordan criterion for a map.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::curves::PolylineCurve;
use crate::lemgraph::{Color, GraphError, GraphReport, LemGraph};
use crate::potential::{harmonic_measure_mc, BoundaryPartition, PotentialError, Region};
use crate::ratfun::{Multiset, RatError, RationalMap, SpherePoint};
use crate::tracer::{trace, TraceError, TraceOptions};

/// Discretisation allowance added to the `3 sigma` threshold.
pub const ALLOWANCE: f64 = 5e-3;
pub const SIGMAS: f64 = 3.0;
pub const DEFAULT_LEVELS: u32 = 4;
/// Critical values this close to the unit circle make the criterion inapplicable.
pub const BOUNDARY_CRITICAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CertError {
    #[error("|r(inf)| = {0} is not > 1; the criterion needs the level curve away from infinity")]
    Refused(f64),
    #[error("point {0} lies in the unbounded face; a polynomial has no finite poles")]
    PointInUnboundedFace(SpherePoint),
    #[error("bounded face {face} has {components} boundary components; it must be simply connected")]
    NotSimplyConnected { face: usize, components: usize },
    #[error("graph has no unbounded face")]
    NoUnboundedFace,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Rat(#[from] RatError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertOptions {
    pub levels: u32,
    pub walkers: u64,
    pub seed: u64,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions {
            levels: DEFAULT_LEVELS,
            walkers: 100_000,
            seed: 0,
        }
    }
}

/// Condition (2) on one dyadic arc `B` of a shared edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcResidual {
    pub level: u32,
    pub index: usize,
    pub s0: f64,
    pub s1: f64,
    /// Weighted measure sum from the points of the left face.
    pub left_sum: f64,
    /// Weighted measure sum from the points of the right face.
    pub right_sum: f64,
    pub residual: f64,
    pub sigma: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeTable {
    pub edge: usize,
    pub left_face: usize,
    pub right_face: usize,
    pub arcs: Vec<ArcResidual>,
}

impl EdgeTable {
    pub fn max_z_score(&self) -> f64 {
        self.arcs
            .iter()
            .map(|a| if a.sigma > 0.0 { a.residual / a.sigma } else { 0.0 })
            .fold(0.0, f64::max)
    }
}

/// Condition (3) on one boundary component of one face.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralityRow {
    pub face: usize,
    pub component: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub nearest: i64,
    pub integer: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated { witness: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertReport {
    pub condition1: GraphReport,
    pub condition2: Vec<EdgeTable>,
    pub condition3: Vec<IntegralityRow>,
    pub verdict: Verdict,
    pub sigmas: f64,
    pub allowance: f64,
    pub options: CertOptions,
}

impl CertReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }
}

/// A candidate point with its weight in condition (2) and in condition (3).
struct Weighted {
    point: SpherePoint,
    face: usize,
    measure_weight: f64,
    integer_weight: f64,
}

/// One walk-on-spheres run: measures of the finest dyadic arcs of every
/// boundary edge of the face, seen from one weighted point.
struct PointRun {
    measure_weight: f64,
    integer_weight: f64,
    walkers: f64,
    fine: HashMap<usize, Vec<f64>>,
}

/// Weighted sum over runs of the measure of a union of fine arcs, with its variance.
fn union_stats(runs: &[PointRun], arcs: &[(usize, usize)], weight: impl Fn(&PointRun) -> f64) -> (f64, f64) {
    runs.iter().fold((0.0, 0.0), |(v, var), r| {
        let p: f64 = arcs.iter().map(|&(e, a)| r.fine[&e][a]).sum();
        let w = weight(r);
        (v + w * p, var + w * w * (p * (1.0 - p)).max(0.0) / r.walkers)
    })
}

/// Full check with multiplicity weights: the graph clauses, equal weighted measure sums
/// across every shared edge on dyadic arcs, and integral measure sums on
/// every boundary component of every face.
pub fn certify_thm18(g: &LemGraph, pts: &Multiset, opts: CertOptions) -> Result<CertReport, CertError> {
    let mut weighted = Vec::new();
    for &(p, m) in pts.iter() {
        weighted.push(Weighted {
            point: p,
            face: g.locate(p)?,
            measure_weight: m as f64,
            integer_weight: m as f64,
        });
    }
    certify_weighted(g, &weighted, opts)
}

/// Polynomial form: all points in bounded simply connected faces, weights
/// `1/m` on the point sums against the measure from infinity, and `m` on the
/// integrality sums of the unbounded face.
pub fn certify_thm19(g: &LemGraph, pts: &Multiset, opts: CertOptions) -> Result<CertReport, CertError> {
    let outer = g.faces.iter().position(|f| f.unbounded).ok_or(CertError::NoUnboundedFace)?;
    for f in &g.faces {
        if !f.unbounded && f.boundary.len() != 1 {
            return Err(CertError::NotSimplyConnected {
                face: f.id,
                components: f.boundary.len(),
            });
        }
    }
    let m = pts.total() as f64;
    let mut weighted = Vec::new();
    for &(p, k) in pts.iter() {
        let face = g.locate(p)?;
        if face == outer || p.is_infinite() {
            return Err(CertError::PointInUnboundedFace(p));
        }
        weighted.push(Weighted {
            point: p,
            face,
            measure_weight: k as f64 / m,
            integer_weight: k as f64,
        });
    }
    weighted.push(Weighted {
        point: SpherePoint::Infinity,
        face: outer,
        measure_weight: 1.0,
        integer_weight: m,
    });
    certify_weighted(g, &weighted, opts)
}

fn certify_weighted(g: &LemGraph, pts: &[Weighted], opts: CertOptions) -> Result<CertReport, CertError> {
    let condition1 = g.validate();
    let fine_arcs = 1usize << opts.levels;
    let mut runs: Vec<Vec<PointRun>> = Vec::with_capacity(g.faces.len());
    let mut regions = Vec::with_capacity(g.faces.len());
    for (fi, face) in g.faces.iter().enumerate() {
        let region = Region::from_face(g, fi)?;
        let edge_ids: Vec<usize> = face.boundary_edges().map(|d| d.edge).collect();
        let mut arcs = Vec::new();
        for (ci, c) in region.curves().iter().enumerate() {
            arcs.extend(BoundaryPartition::dyadic(ci, c, opts.levels, &format!("e{}", edge_ids[ci])).arcs);
        }
        let partition = BoundaryPartition::new(arcs);
        let mut face_runs = Vec::new();
        for (k, w) in pts.iter().enumerate().filter(|(_, w)| w.face == fi) {
            let h = harmonic_measure_mc(&region, w.point, &partition, opts.walkers, opts.seed.wrapping_add(k as u64))?;
            let fine = edge_ids
                .iter()
                .map(|&e| {
                    let values = (0..fine_arcs)
                        .map(|a| h.get(&format!("e{e}/{a}")).expect("label present").value)
                        .collect();
                    (e, values)
                })
                .collect();
            face_runs.push(PointRun {
                measure_weight: w.measure_weight,
                integer_weight: w.integer_weight,
                walkers: opts.walkers as f64,
                fine,
            });
        }
        runs.push(face_runs);
        regions.push((region, edge_ids));
    }

    let mut first_violation: Option<String> = None;
    let mut condition2 = Vec::new();
    for (ei, e) in g.edges.iter().enumerate() {
        let len = e.curve.length();
        let mut arcs = Vec::new();
        for level in 0..=opts.levels {
            let per = 1usize << (opts.levels - level);
            let count = 1usize << level;
            for index in 0..count {
                let span: Vec<(usize, usize)> = (index * per..(index + 1) * per).map(|a| (ei, a)).collect();
                let (lv, lvar) = union_stats(&runs[e.left], &span, |r| r.measure_weight);
                let (rv, rvar) = union_stats(&runs[e.right], &span, |r| r.measure_weight);
                let residual = (lv - rv).abs();
                let sigma = (lvar + rvar).sqrt();
                let violated = residual > SIGMAS * sigma + ALLOWANCE;
                if violated && first_violation.is_none() {
                    first_violation = Some(format!(
                        "condition 2 on edge {ei}, level {level}, arc {index}: |{lv:.4} - {rv:.4}| = {residual:.4}"
                    ));
                }
                arcs.push(ArcResidual {
                    level,
                    index,
                    s0: len * index as f64 / count as f64,
                    s1: len * (index + 1) as f64 / count as f64,
                    left_sum: lv,
                    right_sum: rv,
                    residual,
                    sigma,
                    violated,
                });
            }
        }
        condition2.push(EdgeTable {
            edge: ei,
            left_face: e.left,
            right_face: e.right,
            arcs,
        });
    }

    let mut condition3 = Vec::new();
    for (fi, (region, edge_ids)) in regions.iter().enumerate() {
        for j in 0..region.components().len() {
            let span: Vec<(usize, usize)> = region
                .component_curves(j)
                .flat_map(|ci| (0..fine_arcs).map(move |a| (edge_ids[ci], a)))
                .collect();
            let (v, var) = union_stats(&runs[fi], &span, |r| r.integer_weight);
            let stderr = var.sqrt();
            let nearest = v.round() as i64;
            let integer = (v - nearest as f64).abs() <= SIGMAS * stderr + ALLOWANCE;
            if !integer && first_violation.is_none() {
                first_violation = Some(format!("condition 3 on face {fi}, component {j}: sum {v:.4} is not an integer"));
            }
            condition3.push(IntegralityRow {
                face: fi,
                component: j,
                estimate: v,
                stderr,
                nearest,
                integer,
            });
        }
    }

    if let Some(v) = condition1.violations.first() {
        first_violation = Some(format!("condition 1: {v:?}"));
    }
    let verdict = match first_violation {
        None => Verdict::Consistent,
        Some(witness) => Verdict::Violated { witness },
    };
    Ok(CertReport {
        condition1,
        condition2,
        condition3,
        verdict,
        sigmas: SIGMAS,
        allowance: ALLOWANCE,
        options: opts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JordanVerdict {
    Jordan,
    NotJordan,
    /// A critical value lies on the unit circle, so the level curve has a vertex.
    BoundaryCritical,
    /// The critical-value counts allow a Jordan curve but no witness curve was found.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessCurve {
    TracedLevelCurve { points: usize },
    Circle { center: Complex64, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanReport {
    pub degree: usize,
    pub critical_values: Multiset,
    pub inside: usize,
    pub outside: usize,
    pub on_circle: usize,
    pub counts_hold: bool,
    pub witness: Option<WitnessCurve>,
    /// `max |r|` on the witness.
    pub witness_max: Option<f64>,
    /// `(V, closed edges, open edges)` of the traced level curve `|r| = 1`, when tracing succeeded.
    pub traced_signature: Option<(usize, usize, usize)>,
    pub verdict: JordanVerdict,
}

/// Decides whether `|r| = 1` is an analytic Jordan curve from the positions
/// of the critical values (exactly `k - 1` inside and `k - 1` outside the
/// unit circle) and a witness Jordan curve around the zeros with `|r| <= 1`.
/// Rescale to `r / c` for other levels.
pub fn jordan_criterion(r: &RationalMap, opts: TraceOptions) -> Result<JordanReport, CertError> {
    let at_inf = r.eval_sphere(SpherePoint::Infinity)?;
    if let SpherePoint::Finite(v) = at_inf {
        if v.norm() <= 1.0 {
            return Err(CertError::Refused(v.norm()));
        }
    }
    let k = r.degree();
    let critical_values = r.critical_values()?;
    let (mut inside, mut outside, mut on_circle) = (0, 0, 0);
    for &(v, m) in critical_values.iter() {
        let n = v.norm();
        if (n - 1.0).abs() <= BOUNDARY_CRITICAL_TOL {
            on_circle += m;
        } else if n < 1.0 {
            inside += m;
        } else {
            outside += m;
        }
    }
    let counts_hold = on_circle == 0 && inside + 1 == k && outside + 1 == k;

    let traced = trace(r, 1.0, opts).ok();
    let traced_signature = traced.as_ref().map(|t| t.signature());
    let mut witness = None;
    let mut witness_max = None;
    if on_circle == 0 && counts_hold {
        if let Some(t) = traced.as_ref().filter(|t| t.is_jordan()) {
            let curve = &t.edges[0].curve;
            if encloses_zeros(r, curve) {
                witness_max = Some(curve.points().iter().map(|&z| r.abs(z)).fold(0.0, f64::max));
                witness = Some(WitnessCurve::TracedLevelCurve {
                    points: curve.points().len(),
                });
            }
        }
        if witness.is_none() {
            if let Some((center, radius, max)) = circle_witness(r) {
                witness = Some(WitnessCurve::Circle { center, radius });
                witness_max = Some(max);
            }
        }
    }
    let verdict = if on_circle > 0 {
        JordanVerdict::BoundaryCritical
    } else if !counts_hold {
        JordanVerdict::NotJordan
    } else if witness.is_some() {
        JordanVerdict::Jordan
    } else {
        JordanVerdict::Inconclusive
    };
    Ok(JordanReport {
        degree: k,
        critical_values,
        inside,
        outside,
        on_circle,
        counts_hold,
        witness,
        witness_max,
        traced_signature,
        verdict,
    })
}

fn encloses_zeros(r: &RationalMap, curve: &PolylineCurve) -> bool {
    let zeros_in = r.zeros().iter().all(|(z, _)| match z.as_finite() {
        Some(z) => curve.winding_number(z).is_ok_and(|w| w != 0),
        None => false,
    });
    let poles_out = r.poles().iter().all(|(p, _)| match p.as_finite() {
        Some(p) => curve.winding_number(p).is_ok_and(|w| w == 0),
        None => true,
    });
    zeros_in && poles_out
}

/// Circles around the centroid of the zeros on which `|r| <= 1` (up to
/// rounding), enclosing every zero and no finite pole.
fn circle_witness(r: &RationalMap) -> Option<(Complex64, f64, f64)> {
    let zeros: Vec<Complex64> = r.zeros().iter().filter_map(|(z, _)| z.as_finite()).collect();
    if zeros.is_empty() {
        return None;
    }
    let center = zeros.iter().sum::<Complex64>() / zeros.len() as f64;
    let spread = zeros.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let base = spread.max(1e-3);
    for step in 1..=64 {
        let radius = base * (1.0 + step as f64 / 16.0);
        let curve = PolylineCurve::circle(center, radius, 1024);
        if !encloses_zeros(r, &curve) {
            continue;
        }
        let max = curve.points().iter().map(|&z| r.abs(z)).fold(0.0, f64::max);
        if max <= 1.0 + 1e-12 {
            return Some((center, radius, max));
        }
    }
    None
}

/// Both sides of `m = k chi(V) - chi(U)` for a face `U` mapped by `r`
/// onto the disk (white face) or its complement (grey face).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiemannHurwitz {
    pub face: usize,
    /// Critical points inside the face, with multiplicity.
    pub m: i64,
    /// Degree of `r` on the face.
    pub k: i64,
    pub chi_u: i64,
    pub rhs: i64,
    pub holds: bool,
}

pub fn riemann_hurwitz_audit(r: &RationalMap, g: &LemGraph, face: usize) -> Result<RiemannHurwitz, CertError> {
    let f = &g.faces[face];
    let preimages = match f.color {
        Some(Color::Grey) => r.poles(),
        _ => r.zeros(),
    };
    let mut k = 0i64;
    for &(p, mult) in preimages.iter() {
        if g.locate(p)? == face {
            k += mult as i64;
        }
    }
    let mut m = 0i64;
    for &(p, mult) in r.critical_points()?.iter() {
        match g.locate(p) {
            Ok(fp) if fp == face => m += mult as i64,
            Ok(_) | Err(GraphError::OnEdge(..)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let chi_u = f.euler_characteristic();
    let rhs = k - chi_u;
    Ok(RiemannHurwitz {
        face,
        m,
        k,
        chi_u,
        rhs,
        holds: m == rhs,
    })
}

/// Audits every face of a traced lemniscate.
pub fn riemann_hurwitz_all(r: &RationalMap, g: &LemGraph) -> Result<Vec<RiemannHurwitz>, CertError> {
    (0..g.faces.len()).map(|f| riemann_hurwitz_audit(r, g, f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::Poly;

    fn poly(c: &[f64]) -> RationalMap {
        RationalMap::polynomial(Poly::from_real(c)).unwrap()
    }

    fn graph(r: &RationalMap, c: f64) -> LemGraph {
        let t = trace(r, c, TraceOptions::default()).unwrap();
        LemGraph::build(&t, r).unwrap()
    }

    #[test]
    fn jordan_examples() {
        let half = poly(&[-0.5, 0.0, 0.5]);
        let rep = jordan_criterion(&half, TraceOptions::default()).unwrap();
        assert_eq!((rep.inside, rep.outside), (1, 1));
        assert_eq!(rep.verdict, JordanVerdict::Jordan);
        assert!(matches!(rep.witness, Some(WitnessCurve::TracedLevelCurve { .. })));

        let bern = poly(&[-1.0, 0.0, 1.0]);
        assert_eq!(jordan_criterion(&bern, TraceOptions::default()).unwrap().verdict, JordanVerdict::BoundaryCritical);

        let z = poly(&[0.0, 1.0]);
        let rep = jordan_criterion(&z, TraceOptions::default()).unwrap();
        assert_eq!((rep.inside, rep.outside, rep.verdict), (0, 0, JordanVerdict::Jordan));

        let inv = RationalMap::new(Poly::one(), Poly::z()).unwrap();
        assert!(matches!(jordan_criterion(&inv, TraceOptions::default()), Err(CertError::Refused(_))));
    }

    #[test]
    fn riemann_hurwitz_examples() {
        let z = poly(&[0.0, 1.0]);
        let g = graph(&z, 1.0);
        let inner = 1 - g.outer_face();
        let a = riemann_hurwitz_audit(&z, &g, inner).unwrap();
        assert_eq!((a.m, a.rhs), (0, 0));

        let half = poly(&[-0.5, 0.0, 0.5]);
        let g = graph(&half, 1.0);
        for f in 0..2 {
            let a = riemann_hurwitz_audit(&half, &g, f).unwrap();
            assert_eq!((a.m, a.k, a.chi_u), (1, 2, 1), "face {f}");
        }
    }

    #[test]
    fn circle_is_consistent() {
        let z = poly(&[0.0, 1.0]);
        let g = graph(&z, 1.0);
        let opts = CertOptions {
            levels: 2,
            walkers: 20_000,
            seed: 5,
        };
        let pts = Multiset::from_entries(vec![(SpherePoint::finite(0.0, 0.0), 1), (SpherePoint::Infinity, 1)]);
        let rep = certify_thm18(&g, &pts, opts).unwrap();
        assert!(rep.is_consistent(), "{:?}", rep.verdict);
        assert_eq!(rep.condition2.len(), 1);
        assert_eq!(rep.condition2[0].arcs.len(), 1 + 2 + 4);
        assert_eq!(rep.condition3.len(), 2);

        let only_zero = Multiset::from_entries(vec![(SpherePoint::finite(0.0, 0.0), 1)]);
        assert!(certify_thm19(&g, &only_zero, opts).unwrap().is_consistent());
        assert!(matches!(
            certify_thm19(&g, &pts, opts),
            Err(CertError::PointInUnboundedFace(SpherePoint::Infinity))
        ));
    }
}
