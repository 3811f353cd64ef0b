//! Matching pairs `f = conj(g)` on rational lemniscates and their boundary checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::curves::PolylineCurve;
use crate::lemgraph::{GraphError, LemGraph};
use crate::ratfun::{RatError, RationalMap, SpherePoint};
use crate::tracer::{trace, TraceError, TraceOptions};
use crate::welding::WeldingSample;

/// A side condition of the construction `f = r`, `g = c^2 / r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SideCondition {
    /// `r` has no pole in the bounded face.
    NoPoleInside,
    /// `r` has no zero in the unbounded face.
    NoZeroOutside,
    /// `r(inf) = inf`.
    PoleAtInfinity,
}

impl SideCondition {
    pub fn roman(self) -> &'static str {
        match self {
            SideCondition::NoPoleInside => "i",
            SideCondition::NoZeroOutside => "ii",
            SideCondition::PoleAtInfinity => "iii",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionFailure {
    pub condition: SideCondition,
    /// Offending zeros or poles, or the value `r(inf)`.
    pub witnesses: Vec<SpherePoint>,
}

#[derive(Debug, Error)]
pub enum MatchingError {
    #[error("side conditions fail: {}", .0.iter().map(|f| format!("({}) {:?}", f.condition.roman(), f.condition)).collect::<Vec<_>>().join(", "))]
    SideConditions(Vec<ConditionFailure>),
    #[error("level curve is not a single Jordan curve (signature {0:?})")]
    NotJordan((usize, usize, usize)),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rat(#[from] RatError),
}

/// Values of a boundary function at sample points, tagged with their source.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryFunctionSample {
    pub samples: Vec<(Complex64, Complex64)>,
    pub source: String,
}

/// The pair `f = r` inside, `g = c^2 / r` outside a Jordan lemniscate.
#[derive(Clone, Debug)]
pub struct MatchingPair {
    pub r: RationalMap,
    pub c: f64,
    pub curve: PolylineCurve,
}

impl MatchingPair {
    pub fn f(&self, z: Complex64) -> Complex64 {
        self.r.eval(z)
    }

    pub fn g(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.c * self.c, 0.0) / self.r.eval(z)
    }

    /// `g(inf)`, zero by construction.
    pub fn g_at_infinity(&self) -> Result<Complex64, RatError> {
        match self.r.eval_sphere(SpherePoint::Infinity)? {
            SpherePoint::Infinity => Ok(Complex64::new(0.0, 0.0)),
            SpherePoint::Finite(v) => Ok(Complex64::new(self.c * self.c, 0.0) / v),
        }
    }

    pub fn sample_f(&self) -> BoundaryFunctionSample {
        BoundaryFunctionSample {
            samples: self.curve.points().iter().map(|&z| (z, self.f(z))).collect(),
            source: "f = r".into(),
        }
    }

    pub fn sample_g(&self) -> BoundaryFunctionSample {
        BoundaryFunctionSample {
            samples: self.curve.points().iter().map(|&z| (z, self.g(z))).collect(),
            source: "g = c^2 / r".into(),
        }
    }

    pub fn residual(&self) -> f64 {
        verify_matching(|z| self.f(z), |z| self.g(z), self.curve.points())
    }
}

/// Checks the three side conditions on a traced Jordan lemniscate graph,
/// returning every failure.
pub fn side_conditions(r: &RationalMap, g: &LemGraph) -> Result<Vec<ConditionFailure>, MatchingError> {
    let outer = g.outer_face();
    let mut failures = Vec::new();
    let mut inside_poles = Vec::new();
    for &(p, _) in r.poles().iter() {
        if g.locate(p)? != outer {
            inside_poles.push(p);
        }
    }
    if !inside_poles.is_empty() {
        failures.push(ConditionFailure {
            condition: SideCondition::NoPoleInside,
            witnesses: inside_poles,
        });
    }
    let mut outside_zeros = Vec::new();
    for &(z, _) in r.zeros().iter() {
        if g.locate(z)? == outer {
            outside_zeros.push(z);
        }
    }
    if !outside_zeros.is_empty() {
        failures.push(ConditionFailure {
            condition: SideCondition::NoZeroOutside,
            witnesses: outside_zeros,
        });
    }
    let at_inf = r.eval_sphere(SpherePoint::Infinity)?;
    if !at_inf.is_infinite() {
        failures.push(ConditionFailure {
            condition: SideCondition::PoleAtInfinity,
            witnesses: vec![at_inf],
        });
    }
    Ok(failures)
}

/// Traces `|r| = c`, requires a single Jordan curve, checks the side
/// conditions and returns the pair `(r, c^2 / r)`.
pub fn lemniscate_pair(r: &RationalMap, c: f64, opts: TraceOptions) -> Result<MatchingPair, MatchingError> {
    let traced = trace(r, c, opts)?;
    if !traced.is_jordan() {
        return Err(MatchingError::NotJordan(traced.signature()));
    }
    let g = LemGraph::build(&traced, r)?;
    let failures = side_conditions(r, &g)?;
    if !failures.is_empty() {
        return Err(MatchingError::SideConditions(failures));
    }
    Ok(MatchingPair {
        r: r.clone(),
        c,
        curve: traced.edges[0].curve.clone(),
    })
}

/// `sup |f(z) - conj(g(z))|` over the sample points.
pub fn verify_matching(f: impl Fn(Complex64) -> Complex64, g: impl Fn(Complex64) -> Complex64, points: &[Complex64]) -> f64 {
    points.iter().map(|&z| (f(z) - g(z).conj()).norm()).fold(0.0, f64::max)
}

/// `sup_k |phi(theta_k) - psi(h(theta_k))|`, with `psi` sampled on an
/// increasing grid of angles and interpolated linearly (periodically).
pub fn verify_welding_equivalence(phi: &[(f64, Complex64)], psi: &[(f64, Complex64)], h: &WeldingSample) -> f64 {
    phi.iter()
        .map(|&(t, v)| (v - interpolate_periodic(psi, h.eval(t))).norm())
        .fold(0.0, f64::max)
}

fn interpolate_periodic(samples: &[(f64, Complex64)], t: f64) -> Complex64 {
    let t = t.rem_euclid(2.0 * PI);
    let n = samples.len();
    let k = samples.partition_point(|s| s.0 <= t);
    let (a, b) = match k {
        0 => ((samples[n - 1].0 - 2.0 * PI, samples[n - 1].1), samples[0]),
        k if k == n => (samples[n - 1], (samples[0].0 + 2.0 * PI, samples[0].1)),
        k => (samples[k - 1], samples[k]),
    };
    if b.0 == a.0 {
        return a.1;
    }
    a.1 + (b.1 - a.1) * ((t - a.0) / (b.0 - a.0))
}
