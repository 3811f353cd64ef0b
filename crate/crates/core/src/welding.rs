//! Conformal weldings from cumulative interior and exterior harmonic measure.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{CurveError, PolylineCurve};
use crate::potential::{segment_measures, PotentialError, Region};
use crate::ratfun::{Poly, SpherePoint};

#[derive(Debug, Error)]
pub enum WeldingError {
    #[error("curve must be closed")]
    NotClosed,
    #[error("curve is not a Jordan curve")]
    NotJordan,
    #[error("curve must be positively oriented")]
    Clockwise,
    #[error("p vanishes at vertex {0}")]
    ZeroOnCurve(usize),
    #[error("arg p jumps by {jump:.3} between vertices {vertex} and {next}; trace more densely")]
    BranchJump { vertex: usize, next: usize, jump: f64 },
    #[error("arg p turns by {turns:.6} x 2pi around the curve, expected {expected}")]
    WrongTurning { turns: f64, expected: usize },
    #[error("q must lie in (0, 1), got {0}")]
    BadQuantile(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// One vertex of a welding: `theta_in` and `theta_out` are `2pi` times the
/// cumulative interior and exterior harmonic measure from the basepoint vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeldPair {
    pub vertex: usize,
    pub theta_in: f64,
    pub theta_out: f64,
    pub sigma_in: f64,
    pub sigma_out: f64,
}

/// Sampled circle homeomorphism, strictly increasing from `(0, 0)` to `(2pi, 2pi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeldingSample {
    pub pairs: Vec<WeldPair>,
    pub basepoint: usize,
    pub walkers: u64,
    pub seed: u64,
}

impl WeldingSample {
    /// Builds a sample from cumulative angles, dropping vertices where either
    /// coordinate does not advance.
    pub fn from_angles(vertices: &[usize], theta_in: &[f64], theta_out: &[f64]) -> Self {
        let mut pairs: Vec<WeldPair> = Vec::with_capacity(vertices.len());
        for ((&v, &a), &b) in vertices.iter().zip(theta_in).zip(theta_out) {
            let advances = pairs.last().is_none_or(|p| a > p.theta_in && b > p.theta_out);
            if advances {
                pairs.push(WeldPair {
                    vertex: v,
                    theta_in: a,
                    theta_out: b,
                    sigma_in: 0.0,
                    sigma_out: 0.0,
                });
            }
        }
        WeldingSample {
            pairs,
            basepoint: vertices.first().copied().unwrap_or(0),
            walkers: 0,
            seed: 0,
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.pairs
            .windows(2)
            .all(|w| w[1].theta_in > w[0].theta_in && w[1].theta_out > w[0].theta_out)
    }

    /// Piecewise-linear `theta_out` at `theta_in`.
    pub fn eval(&self, theta_in: f64) -> f64 {
        let t = theta_in.rem_euclid(2.0 * PI);
        let k = self.pairs.partition_point(|p| p.theta_in <= t);
        if k == 0 {
            return self.pairs[0].theta_out;
        }
        if k == self.pairs.len() {
            return self.pairs[k - 1].theta_out;
        }
        let (a, b) = (self.pairs[k - 1], self.pairs[k]);
        a.theta_out + (t - a.theta_in) / (b.theta_in - a.theta_in) * (b.theta_out - a.theta_out)
    }

    /// Swaps the two coordinates.
    pub fn inverse(&self) -> WeldingSample {
        WeldingSample {
            pairs: self
                .pairs
                .iter()
                .map(|p| WeldPair {
                    vertex: p.vertex,
                    theta_in: p.theta_out,
                    theta_out: p.theta_in,
                    sigma_in: p.sigma_out,
                    sigma_out: p.sigma_in,
                })
                .collect(),
            ..self.clone()
        }
    }
}

fn check_curve(curve: &PolylineCurve) -> Result<(), WeldingError> {
    if !curve.is_closed() {
        return Err(WeldingError::NotClosed);
    }
    if !curve.is_jordan() {
        return Err(WeldingError::NotJordan);
    }
    if curve.signed_area() <= 0.0 {
        return Err(WeldingError::Clockwise);
    }
    Ok(())
}

/// Welding of a positively oriented Jordan polygon with vertex 0 as basepoint.
/// The interior measure is seen from `inner_base`, the exterior one from
/// infinity through the inversion centred at `inner_base`.
pub fn weld(curve: &PolylineCurve, inner_base: Complex64, walkers: u64, seed: u64) -> Result<WeldingSample, WeldingError> {
    check_curve(curve)?;
    let inner = Region::bounded(vec![vec![curve.clone()]], inner_base)?;
    let outer = Region::unbounded(vec![vec![curve.clone()]], inner_base)?;
    let cin = segment_measures(&inner, SpherePoint::Finite(inner_base), walkers, seed)?;
    let cout = segment_measures(&outer, SpherePoint::Infinity, walkers, seed.wrapping_add(1))?;
    let n = curve.num_segments();
    let total = walkers as f64;
    let mut pairs = vec![WeldPair {
        vertex: 0,
        theta_in: 0.0,
        theta_out: 0.0,
        sigma_in: 0.0,
        sigma_out: 0.0,
    }];
    let (mut ai, mut ao) = (0u64, 0u64);
    for k in 0..n {
        ai += cin.counts[0][k];
        ao += cout.counts[0][k];
        let (fi, fo) = (ai as f64 / total, ao as f64 / total);
        let last = pairs.last().unwrap();
        let vertex = (k + 1) % n;
        let pair = WeldPair {
            vertex,
            theta_in: 2.0 * PI * fi,
            theta_out: 2.0 * PI * fo,
            sigma_in: 2.0 * PI * (fi * (1.0 - fi) / total).sqrt(),
            sigma_out: 2.0 * PI * (fo * (1.0 - fo) / total).sqrt(),
        };
        if pair.theta_in > last.theta_in && pair.theta_out > last.theta_out {
            pairs.push(pair);
        }
    }
    Ok(WeldingSample {
        pairs,
        basepoint: 0,
        walkers,
        seed,
    })
}

/// Exterior angles `theta_out` at every vertex of a traced Jordan lemniscate
/// of the degree-`n` polynomial `p`: `(arg p(z) - arg p(z_0)) / n` followed
/// continuously. The closing vertex is included, so the last value is `2pi`.
pub fn poly_outer_oracle(p: &Poly, curve: &PolylineCurve) -> Result<Vec<f64>, WeldingError> {
    check_curve(curve)?;
    let n = p.degree().unwrap_or(0);
    let pts = curve.points();
    let values: Vec<Complex64> = pts.iter().chain(std::iter::once(&pts[0])).map(|&z| p.eval(z)).collect();
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..values.len() {
        if values[k].norm() == 0.0 {
            return Err(WeldingError::ZeroOnCurve(k % pts.len()));
        }
        let d = (values[k] / values[k - 1]).arg();
        if d.abs() >= PI / 2.0 {
            return Err(WeldingError::BranchJump {
                vertex: k - 1,
                next: k % pts.len(),
                jump: d,
            });
        }
        acc += d;
        out.push(acc / n as f64);
    }
    let turns = acc / (2.0 * PI);
    if (turns - n as f64).abs() > 1e-6 {
        return Err(WeldingError::WrongTurning { turns, expected: n });
    }
    let last = out.len() - 1;
    out[last] = 2.0 * PI;
    Ok(out)
}

/// `sup_j |p(z_j)/c - a e^{i n theta_out_j}|` over the welding vertices, with
/// the unimodular constant `a` fitted by least squares.
pub fn functional_equation_residual(p: &Poly, c: f64, curve: &PolylineCurve, w: &WeldingSample) -> f64 {
    let n = p.degree().unwrap_or(0) as f64;
    let terms: Vec<(Complex64, Complex64)> = w
        .pairs
        .iter()
        .map(|q| (p.eval(curve.points()[q.vertex]) / c, Complex64::from_polar(1.0, n * q.theta_out)))
        .collect();
    let fit: Complex64 = terms.iter().map(|(v, e)| v * e.conj()).sum();
    let a = if fit.norm() > 0.0 { fit / fit.norm() } else { Complex64::new(1.0, 0.0) };
    terms.iter().map(|(v, e)| (v - a * e).norm()).fold(0.0, f64::max)
}

/// Smallest exterior mass carried by welding arcs of total interior mass `q`:
/// arcs are taken in increasing order of exterior/interior mass ratio, the
/// last one fractionally. Identity weldings give `q`; small values indicate
/// mass concentration at this resolution.
pub fn singularity_probe(w: &WeldingSample, q: f64) -> Result<f64, WeldingError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(WeldingError::BadQuantile(q));
    }
    let mut arcs: Vec<(f64, f64)> = w
        .pairs
        .windows(2)
        .map(|p| ((p[1].theta_in - p[0].theta_in) / (2.0 * PI), (p[1].theta_out - p[0].theta_out) / (2.0 * PI)))
        .collect();
    arcs.sort_by(|a, b| (a.1 / a.0).total_cmp(&(b.1 / b.0)));
    let (mut need, mut out) = (q, 0.0);
    for (mi, mo) in arcs {
        if mi >= need {
            out += mo * need / mi;
            break;
        }
        need -= mi;
        out += mo;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_oracles() {
        let circle = PolylineCurve::circle(c(0.0, 0.0), 1.0, 256);
        let z = Poly::z();
        let th = poly_outer_oracle(&z, &circle).unwrap();
        for (k, t) in th.iter().enumerate().take(256) {
            let want = (circle.points()[k] / circle.points()[0]).arg().rem_euclid(2.0 * PI);
            assert!((t - want).abs() < 1e-12 || k == 0);
        }
        let z2 = Poly::from_real(&[0.0, 0.0, 1.0]);
        let th2 = poly_outer_oracle(&z2, &circle).unwrap();
        for (a, b) in th.iter().zip(&th2) {
            assert!((a - b).abs() < 1e-12);
        }
        let vertices: Vec<usize> = (0..=256).map(|k| k % 256).collect();
        let w = WeldingSample::from_angles(&vertices, &th, &th);
        assert!(functional_equation_residual(&z, 1.0, &circle, &w) <= 1e-10);
        assert!((singularity_probe(&w, 0.9).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn corrupted_welding_is_detected() {
        let circle = PolylineCurve::circle(c(0.0, 0.0), 1.0, 256);
        let th = poly_outer_oracle(&Poly::z(), &circle).unwrap();
        let vertices: Vec<usize> = (0..=256).map(|k| k % 256).collect();
        let shifted: Vec<f64> = th.iter().enumerate().map(|(k, &t)| if k > 128 && k < 256 { t + 0.1 } else { t }).collect();
        let w = WeldingSample::from_angles(&vertices, &th, &shifted);
        assert!(functional_equation_residual(&Poly::z(), 1.0, &circle, &w) >= 0.05);
    }

    #[test]
    fn clockwise_curve_is_refused() {
        let circle = PolylineCurve::circle(c(0.0, 0.0), 1.0, 64).reversed();
        assert!(matches!(weld(&circle, c(0.0, 0.0), 10, 0), Err(WeldingError::Clockwise)));
    }

    #[test]
    fn circle_welding_is_identity() {
        let circle = PolylineCurve::circle(c(0.0, 0.0), 1.0, 64);
        let w = weld(&circle, c(0.0, 0.0), 40_000, 11).unwrap();
        assert!(w.is_monotone());
        assert_eq!(w.pairs.last().unwrap().theta_in, 2.0 * PI);
        for p in &w.pairs {
            let tol = (3.0 * (p.sigma_in + p.sigma_out)).max(1e-2);
            assert!((p.theta_in - p.theta_out).abs() <= tol, "{p:?}");
        }
    }
}
