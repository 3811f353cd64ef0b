//! Generalized Koch curves `K_l` and snowflakes from a four-map IFS.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::curves::PolylineCurve;

pub const MAX_DEPTH: u32 = 10;
/// Endpoint mismatch allowed when the three snowflake arcs are joined.
pub const CLOSURE_TOL: f64 = 1e-12;
/// Slack of the open-set polygon tests.
pub const OSC_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum KochError {
    #[error("l = {0} is outside (1/4, 1/2)")]
    BadParameter(f64),
    #[error("s = {0} is outside (1, 2)")]
    BadDimension(f64),
    #[error("depth {n} exceeds {MAX_DEPTH}: {points} points, about {bytes} bytes")]
    TooDeep { n: u32, points: u64, bytes: u64 },
    #[error("snowflake arcs fail to close: endpoint mismatch {0:e}")]
    Closure(f64),
    #[error("snowflake polyline self-intersects at segments {0} and {1}")]
    SelfIntersecting(usize, usize),
}

/// The maps `f_j(z) = scale_j z + offset_j` for one `l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IfsSystem {
    pub l: f64,
    pub b: f64,
    pub theta: f64,
    pub maps: [(Complex64, Complex64); 4],
}

impl IfsSystem {
    pub fn new(l: f64) -> Result<Self, KochError> {
        if !(l > 0.25 && l < 0.5) {
            return Err(KochError::BadParameter(l));
        }
        let b = (l - 0.25).sqrt();
        let theta = (b / (0.5 - l)).atan();
        let rot = Complex64::from_polar(l, theta);
        let maps = [
            (Complex64::new(l, 0.0), Complex64::new(0.0, 0.0)),
            (rot, Complex64::new(l, 0.0)),
            (rot.conj(), Complex64::new(0.5, b)),
            (Complex64::new(l, 0.0), Complex64::new(1.0 - l, 0.0)),
        ];
        Ok(IfsSystem { l, b, theta, maps })
    }

    pub fn apply(&self, j: usize, z: Complex64) -> Complex64 {
        let (s, o) = self.maps[j];
        s * z + o
    }

    /// The triangle `0, 1/2 + ib, 1` used as open-set witness.
    pub fn triangle(&self) -> [Complex64; 3] {
        [Complex64::new(0.0, 0.0), Complex64::new(0.5, self.b), Complex64::new(1.0, 0.0)]
    }
}

/// `log 4 / log(1/l)`.
pub fn dimension(l: f64) -> Result<f64, KochError> {
    if !(l > 0.25 && l < 0.5) {
        return Err(KochError::BadParameter(l));
    }
    Ok(4f64.ln() / (1.0 / l).ln())
}

/// Inverse of [`dimension`]: `4^(-1/s)`.
pub fn l_for_dimension(s: f64) -> Result<f64, KochError> {
    if !(s > 1.0 && s < 2.0) {
        return Err(KochError::BadDimension(s));
    }
    Ok(4f64.powf(-1.0 / s))
}

fn check_depth(n: u32) -> Result<(), KochError> {
    if n > MAX_DEPTH {
        let points = 4u64.saturating_pow(n).saturating_add(1);
        return Err(KochError::TooDeep {
            n,
            points,
            bytes: points.saturating_mul(16),
        });
    }
    Ok(())
}

/// Vertices of the level-`n` approximant, `4^n + 1` points from 0 to 1.
pub fn approximant_points(l: f64, n: u32) -> Result<Vec<Complex64>, KochError> {
    let ifs = IfsSystem::new(l)?;
    check_depth(n)?;
    let mut pts = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(4 * pts.len() - 3);
        next.push(Complex64::new(0.0, 0.0));
        for j in 0..4 {
            next.extend(pts[1..].iter().map(|&z| ifs.apply(j, z)));
        }
        pts = next;
    }
    Ok(pts)
}

pub fn approximant(l: f64, n: u32) -> Result<PolylineCurve, KochError> {
    let pts = approximant_points(l, n)?;
    Ok(PolylineCurve::new(pts, false).expect("approximant vertices are distinct"))
}

/// Closed, positively oriented level-`n` snowflake made of `K`, the arc
/// `e^{-2i pi/3} K + 1` and `e^{-i pi/3} conj(K)` traversed backwards.
pub fn snowflake(l: f64, n: u32) -> Result<PolylineCurve, KochError> {
    let k = approximant_points(l, n)?;
    let rot2 = Complex64::from_polar(1.0, -2.0 * PI / 3.0);
    let rot1 = Complex64::from_polar(1.0, -PI / 3.0);
    let a = k.clone();
    let b: Vec<Complex64> = k.iter().map(|&z| rot2 * z + 1.0).collect();
    let c: Vec<Complex64> = k.iter().rev().map(|&z| rot1 * z.conj()).collect();
    let mismatch = [
        (a[a.len() - 1] - b[0]).norm(),
        (b[b.len() - 1] - c[0]).norm(),
        (c[c.len() - 1] - a[0]).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if mismatch > CLOSURE_TOL {
        return Err(KochError::Closure(mismatch));
    }
    let mut pts = a;
    pts.extend_from_slice(&b[1..]);
    pts.extend_from_slice(&c[1..c.len() - 1]);
    let mut curve = PolylineCurve::new(pts, true).expect("snowflake vertices are distinct");
    if curve.signed_area() < 0.0 {
        curve = curve.reversed();
    }
    if let Some((i, j)) = curve.find_self_intersection() {
        return Err(KochError::SelfIntersecting(i, j));
    }
    Ok(curve)
}

/// Largest endpoint mismatch of the three snowflake arcs.
pub fn closure_mismatch(l: f64, n: u32) -> Result<f64, KochError> {
    let k = approximant_points(l, n)?;
    let rot2 = Complex64::from_polar(1.0, -2.0 * PI / 3.0);
    let rot1 = Complex64::from_polar(1.0, -PI / 3.0);
    let (first, last) = (k[0], k[k.len() - 1]);
    Ok([
        (last - (rot2 * first + 1.0)).norm(),
        ((rot2 * last + 1.0) - rot1 * last.conj()).norm(),
        (rot1 * first.conj() - first).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpenSetWitness {
    pub holds: bool,
    /// Images `f_j(V)` not contained in `V`.
    pub escaping: Vec<usize>,
    /// Image pairs whose interiors overlap.
    pub overlapping: Vec<(usize, usize)>,
}

/// Checks on the triangle `V` that the four images `f_j(V)` lie in `V` and
/// have pairwise disjoint interiors, by separating-axis tests.
pub fn open_set_witness(l: f64) -> Result<OpenSetWitness, KochError> {
    let ifs = IfsSystem::new(l)?;
    let v = ifs.triangle();
    let images: Vec<[Complex64; 3]> = (0..4).map(|j| v.map(|z| ifs.apply(j, z))).collect();
    let escaping: Vec<usize> = images
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.iter().all(|&z| in_triangle(&v, z)))
        .map(|(j, _)| j)
        .collect();
    let mut overlapping = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if !separated(&images[i], &images[j]) {
                overlapping.push((i, j));
            }
        }
    }
    Ok(OpenSetWitness {
        holds: escaping.is_empty() && overlapping.is_empty(),
        escaping,
        overlapping,
    })
}

fn in_triangle(t: &[Complex64; 3], z: Complex64) -> bool {
    let sign = crate::curves::orient(t[0], t[1], t[2]).signum();
    (0..3).all(|k| {
        let (a, b) = (t[k], t[(k + 1) % 3]);
        let edge = b - a;
        // signed distance to the edge line, positive inside
        sign * (edge.re * (z - a).im - edge.im * (z - a).re) / edge.norm() >= -OSC_SLACK
    })
}

fn separated(p: &[Complex64; 3], q: &[Complex64; 3]) -> bool {
    let axes = p.iter().zip(p.iter().cycle().skip(1)).chain(q.iter().zip(q.iter().cycle().skip(1)));
    axes.map(|(&a, &b)| {
        let d = b - a;
        Complex64::new(-d.im, d.re) / d.norm()
    })
    .any(|axis| {
        let proj = |t: &[Complex64; 3]| {
            let v = t.map(|z| z.re * axis.re + z.im * axis.im);
            (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        };
        let ((pl, ph), (ql, qh)) = (proj(p), proj(q));
        ph <= ql + OSC_SLACK || qh <= pl + OSC_SLACK
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_at_03() {
        let ifs = IfsSystem::new(0.3).unwrap();
        assert!((ifs.b - 0.05f64.sqrt()).abs() < 1e-15);
        assert!((ifs.b - 0.223_606_797_749_979).abs() < 1e-14);
        assert!((ifs.theta - 0.841_068_670_567_930_1).abs() < 1e-12);
        for (s, _) in ifs.maps {
            assert!((s.norm() - 0.3).abs() < 1e-15);
        }
        assert_eq!(ifs.apply(0, Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert!((ifs.apply(3, Complex64::new(1.0, 0.0)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn theta_vanishes_near_quarter() {
        assert!(IfsSystem::new(0.25 + 1e-12).unwrap().theta < 1e-5);
        assert!(IfsSystem::new(0.25).is_err());
        assert!(IfsSystem::new(0.5).is_err());
    }

    #[test]
    fn first_levels() {
        let l = 0.3;
        assert_eq!(approximant_points(l, 0).unwrap(), vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let p = approximant_points(l, 1).unwrap();
        let ifs = IfsSystem::new(l).unwrap();
        let apex = Complex64::new(0.5, ifs.b);
        let want = [Complex64::new(0.0, 0.0), Complex64::new(l, 0.0), apex, Complex64::new(1.0 - l, 0.0), Complex64::new(1.0, 0.0)];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).norm() < 1e-15, "{a} vs {b}");
        }
        let p3 = approximant_points(l, 3).unwrap();
        assert_eq!(p3.len(), 65);
        assert!(p3.iter().all(|&z| in_triangle(&ifs.triangle(), z)));
    }

    #[test]
    fn third_triangle_snowflake() {
        let s = snowflake(1.0 / 3.0, 0).unwrap();
        assert_eq!(s.points().len(), 3);
        assert!(s.signed_area() > 0.0);
        let corner = Complex64::from_polar(1.0, -PI / 3.0);
        for want in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), corner] {
            assert!(s.points().iter().any(|&z| (z - want).norm() < 1e-15));
        }
    }

    #[test]
    fn dimension_formula() {
        assert!((dimension(1.0 / 3.0).unwrap() - 1.261_859_507_142_914_8).abs() < 1e-14);
        assert!((dimension(0.25 + 1e-12).unwrap() - 1.0).abs() < 1e-10);
        assert!((dimension(0.5 - 1e-12).unwrap() - 2.0).abs() < 1e-10);
        for l in [0.3, 0.3468, 0.45] {
            assert!((l_for_dimension(dimension(l).unwrap()).unwrap() - l).abs() < 1e-14);
        }
        assert!(l_for_dimension(2.0).is_err());
    }

    #[test]
    fn depth_limit() {
        assert!(matches!(approximant(0.3, 11), Err(KochError::TooDeep { n: 11, .. })));
    }

    #[test]
    fn open_set_condition() {
        for l in [0.3, 0.45] {
            assert!(open_set_witness(l).unwrap().holds, "l = {l}");
        }
    }
}
