//! Complex polynomials and rational maps on the Riemann sphere.
//!
//! Everything here works in plain `f64` complex arithmetic. Roots are found
//! with the Aberth-Ehrlich simultaneous iteration and grouped into a
//! [`Multiset`] by overlapping inclusion discs, so that multiple roots come
//! back as a single entry carrying their multiplicity.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative clustering tolerance for roots.
pub const CLUSTER_TOL: f64 = 1e-8;

const MAX_ABERTH_ITERS: usize = 1000;

#[derive(Debug, Error)]
pub enum RatError {
    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
        max_residual: f64,
    },
    #[error("polynomial of degree {0} has no roots to find")]
    ConstantPolynomial(i64),
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("numerator and denominator share a root near {0}")]
    CommonRoot(Complex64),
    #[error("0/0 encountered evaluating an unreduced map at {0}")]
    Indeterminate(SpherePoint),
    #[error("map has degree 0; operation needs degree >= 1")]
    DegreeZero,
    #[error("invalid map JSON: {0}")]
    Json(String),
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Modulus, with `f64::INFINITY` at the point at infinity.
    pub fn norm(&self) -> f64 {
        match self {
            SpherePoint::Finite(z) => z.norm(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    /// Chordal distance on the unit-diameter-2 sphere, `2|a-b| / sqrt((1+|a|^2)(1+|b|^2))`.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(a), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(a)) => 2.0 / (1.0 + a.norm_sqr()).sqrt(),
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
            }
        }
    }

    fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for SpherePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Finite(z) => [z.re, z.im].serialize(s),
            SpherePoint::Infinity => "inf".serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Pair([re, im]) => Ok(SpherePoint::finite(re, im)),
            Repr::Tag(t) if t == "inf" || t == "infinity" => Ok(SpherePoint::Infinity),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("bad sphere point {t:?}"))),
        }
    }
}

/// Points of the sphere with positive integer multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Multiset {
    entries: Vec<(SpherePoint, usize)>,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(SpherePoint, usize)>) -> Self {
        let mut m = Multiset::new();
        for (p, k) in entries {
            m.push(p, k);
        }
        m
    }

    /// Adds `mult` copies of `p`, merging with an existing entry at the same point.
    pub fn push(&mut self, p: SpherePoint, mult: usize) {
        if mult == 0 {
            return;
        }
        if let Some(e) = self.entries.iter_mut().find(|(q, _)| *q == p) {
            e.1 += mult;
        } else {
            self.entries.push((p, mult));
        }
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, k)| k).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(SpherePoint, usize)> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &[(SpherePoint, usize)] {
        &self.entries
    }

    /// Multiplicity of the entry within chordal distance `tol` of `p` (0 when absent).
    pub fn multiplicity_near(&self, p: &SpherePoint, tol: f64) -> usize {
        self.entries
            .iter()
            .filter(|(q, _)| q.chordal_distance(p) <= tol)
            .map(|(_, k)| k)
            .sum()
    }

    /// Greedily merges entries whose chordal distance is at most `tol`.
    pub fn merged(&self, tol: f64) -> Multiset {
        let mut out: Vec<(SpherePoint, usize)> = Vec::new();
        for &(p, k) in &self.entries {
            match out.iter_mut().find(|(q, _)| q.chordal_distance(&p) <= tol) {
                Some(e) => e.1 += k,
                None => out.push((p, k)),
            }
        }
        Multiset { entries: out }
    }

    /// Entries sorted by (re, im) with infinity last; useful for stable output.
    pub fn sorted(&self) -> Multiset {
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| {
            let key = |p: &SpherePoint| match p {
                SpherePoint::Finite(z) => (0u8, z.re, z.im),
                SpherePoint::Infinity => (1u8, 0.0, 0.0),
            };
            let (ka, kb) = (key(&a.0), key(&b.0));
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        Multiset { entries }
    }
}

/// Complex polynomial, coefficients in ascending degree order.
///
/// Trailing exact zeros are stripped, so the last stored coefficient is the
/// leading one. The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(Complex64::new(1.0, 0.0))
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Poly::from_real(&[0.0, 1.0])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Poly::one();
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial flagged as -1.
    pub fn degree_signed(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |a_k| |z|^k`, the natural scale of rounding error in `eval(z)`.
    pub fn magnitude_at(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(Vec::new());
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `self * a - other * b` with leading coefficients that are pure
    /// cancellation noise chopped off.
    fn cross_difference(a: &Poly, b: &Poly, c: &Poly, d: &Poly) -> Poly {
        let ab = a.mul(b);
        let cd = c.mul(d);
        let n = ab.coeffs.len().max(cd.coeffs.len());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        let mut mag = vec![0.0; n];
        for (k, v) in ab.coeffs.iter().enumerate() {
            coeffs[k] += v;
        }
        for (k, v) in cd.coeffs.iter().enumerate() {
            coeffs[k] -= v;
        }
        // termwise magnitudes bound the cancellation error of each coefficient
        for (i, x) in a.coeffs.iter().enumerate() {
            for (j, y) in b.coeffs.iter().enumerate() {
                mag[i + j] += x.norm() * y.norm();
            }
        }
        for (i, x) in c.coeffs.iter().enumerate() {
            for (j, y) in d.coeffs.iter().enumerate() {
                mag[i + j] += x.norm() * y.norm();
            }
        }
        while let Some(last) = coeffs.last() {
            let k = coeffs.len() - 1;
            if last.norm() <= 64.0 * f64::EPSILON * mag[k] {
                coeffs.pop();
            } else {
                break;
            }
        }
        Poly::new(coeffs)
    }

    /// Roots with multiplicities.
    ///
    /// `tol` is the relative clustering tolerance: iterates closer than
    /// `tol * (1 + |z|)` are always merged, and iterates whose inclusion
    /// discs overlap are merged as well.
    pub fn roots(&self, tol: f64) -> Result<Multiset, RatError> {
        let n = match self.degree() {
            Some(n) if n >= 1 => n,
            _ => return Err(RatError::ConstantPolynomial(self.degree_signed())),
        };
        let zero_mult = self.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
        let mut out = Multiset::new();
        if zero_mult > 0 {
            out.push(SpherePoint::Finite(Complex64::new(0.0, 0.0)), zero_mult);
        }
        if zero_mult == n {
            return Ok(out);
        }
        let reduced = Poly::new(self.coeffs[zero_mult..].to_vec());
        let approx = reduced.aberth()?;
        for (z, k) in reduced.cluster(&approx, tol) {
            out.push(SpherePoint::Finite(z), k);
        }
        Ok(out)
    }

    fn aberth(&self) -> Result<Vec<Complex64>, RatError> {
        let n = self.coeffs.len() - 1;
        let dp = self.derivative();
        let lead = self.leading().norm();
        let radius = (self.coeffs[0].norm() / lead).powf(1.0 / n as f64).max(1e-12);
        let mut z: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * j as f64 / n as f64))
            .collect();
        let mut done = vec![false; n];
        for _ in 0..MAX_ABERTH_ITERS {
            let mut all_done = true;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let zi = z[i];
                let p = self.eval(zi);
                let noise = 4.0 * (n as f64 + 1.0) * f64::EPSILON * self.magnitude_at(zi);
                if p.norm() <= noise {
                    done[i] = true;
                    continue;
                }
                all_done = false;
                let d = dp.eval(zi);
                let ratio = if d.norm() == 0.0 {
                    Complex64::new(radius.max(1.0) * 1e-3, 0.0)
                } else {
                    p / d
                };
                let repulsion: Complex64 = z
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &zj)| {
                        let diff = zi - zj;
                        if diff.norm() == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            diff.inv()
                        }
                    })
                    .sum();
                let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
                let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
                z[i] = zi - step;
                if step.norm() <= f64::EPSILON * z[i].norm() {
                    done[i] = true;
                }
            }
            if all_done {
                return Ok(z);
            }
        }
        let residuals: Vec<f64> = z
            .iter()
            .map(|&zi| self.eval(zi).norm() / self.magnitude_at(zi).max(f64::MIN_POSITIVE))
            .collect();
        let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
        // converged to rounding level except for the stopping test: accept
        if max_residual <= 1e-10 {
            return Ok(z);
        }
        Err(RatError::NoConvergence {
            iterations: MAX_ABERTH_ITERS,
            residuals,
            max_residual,
        })
    }

    fn cluster(&self, z: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
        let n = z.len();
        let lead = self.leading().norm();
        let radii: Vec<f64> = (0..n)
            .map(|i| {
                let p = self.eval(z[i]).norm();
                let noise = 4.0 * (n as f64 + 1.0) * f64::EPSILON * self.magnitude_at(z[i]);
                let prod: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (z[i] - z[j]).norm())
                    .product();
                if prod == 0.0 {
                    f64::INFINITY
                } else {
                    n as f64 * (p + noise) / (lead * prod)
                }
            })
            .collect();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while parent[r] != r {
                r = parent[r];
            }
            let mut k = i;
            while parent[k] != r {
                let next = parent[k];
                parent[k] = r;
                k = next;
            }
            r
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (z[i] - z[j]).norm();
                let scale = 1.0 + z[i].norm().max(z[j].norm());
                if d <= tol * scale || d <= radii[i] + radii[j] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
        for (i, &zi) in z.iter().enumerate().take(n) {
            let r = find(&mut parent, i);
            match groups.iter_mut().find(|g| g.0 == r) {
                Some(g) => {
                    g.1 += zi;
                    g.2 += 1;
                }
                None => groups.push((r, zi, 1)),
            }
        }
        groups
            .into_iter()
            .map(|(root, sum, k)| {
                let centre = sum / k as f64;
                if k == 1 {
                    return (centre, 1);
                }
                let spread = (0..n)
                    .filter(|&i| find(&mut parent, i) == root)
                    .map(|i| (z[i] - centre).norm())
                    .fold(0.0, f64::max);
                (self.polish_multiple(centre, k, 2.0 * spread + f64::EPSILON), k)
            })
            .collect()
    }

    /// A root of multiplicity `k` is a simple root of the `(k-1)`-th
    /// derivative; Newton on that derivative sharpens the cluster centre.
    fn polish_multiple(&self, centre: Complex64, k: usize, radius: f64) -> Complex64 {
        let mut d = self.clone();
        for _ in 1..k {
            d = d.derivative();
        }
        let mut z = centre;
        for _ in 0..20 {
            let (v, dv) = d.eval_with_derivative(z);
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
                break;
            }
        }
        if (z - centre).norm() <= radius && z.re.is_finite() && z.im.is_finite() {
            z
        } else {
            centre
        }
    }
}

/// A rational map `num / den` of degree `max(deg num, deg den)`.
///
/// Zeros, poles and critical points are computed once at construction.
#[derive(Clone, Debug)]
pub struct RationalMap {
    num: Poly,
    den: Poly,
    dnum: Poly,
    dden: Poly,
    zeros: Multiset,
    poles: Multiset,
    critical: Multiset,
}

/// Wire format for rational maps: ascending-degree `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MapJson {
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

impl RationalMap {
    pub fn new(num: Poly, den: Poly) -> Result<Self, RatError> {
        if den.is_zero() {
            return Err(RatError::ZeroDenominator);
        }
        let dn = num.degree().unwrap_or(0);
        let dd = den.degree().unwrap_or(0);
        let k = dn.max(dd);

        let mut zeros = Multiset::new();
        let mut poles = Multiset::new();
        if !num.is_zero() && dn >= 1 {
            zeros = num.roots(CLUSTER_TOL)?;
        }
        if dd >= 1 {
            poles = den.roots(CLUSTER_TOL)?;
        }
        for (p, _) in poles.iter() {
            let z = p.as_finite().expect("finite pole");
            if !num.is_zero() && num.eval(z).norm() <= 1e-8 * num.magnitude_at(z) {
                return Err(RatError::CommonRoot(z));
            }
        }
        if !num.is_zero() && dn < dd {
            zeros.push(SpherePoint::Infinity, dd - dn);
        }
        if dd < dn {
            poles.push(SpherePoint::Infinity, dn - dd);
        }

        let dnum = num.derivative();
        let dden = den.derivative();
        let mut critical = Multiset::new();
        if k >= 1 && !num.is_zero() {
            let w = Poly::cross_difference(&dnum, &den, &num, &dden);
            if w.degree().is_some_and(|d| d >= 1) {
                critical = w.roots(CLUSTER_TOL)?;
            }
            let finite = critical.total();
            let expected = 2 * k - 2;
            if finite < expected {
                critical.push(SpherePoint::Infinity, expected - finite);
            }
        }
        Ok(RationalMap {
            num,
            den,
            dnum,
            dden,
            zeros,
            poles,
            critical,
        })
    }

    pub fn polynomial(p: Poly) -> Result<Self, RatError> {
        RationalMap::new(p, Poly::one())
    }

    pub fn from_json(m: &MapJson) -> Result<Self, RatError> {
        let conv = |v: &[[f64; 2]]| Poly::new(v.iter().map(|c| Complex64::new(c[0], c[1])).collect());
        RationalMap::new(conv(&m.num), conv(&m.den))
    }

    pub fn from_json_str(s: &str) -> Result<Self, RatError> {
        let m: MapJson = serde_json::from_str(s).map_err(|e| RatError::Json(e.to_string()))?;
        RationalMap::from_json(&m)
    }

    pub fn to_json(&self) -> MapJson {
        let conv = |p: &Poly| p.coeffs().iter().map(|c| [c.re, c.im]).collect();
        MapJson {
            num: conv(&self.num),
            den: conv(&self.den),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// `(zeros, poles)` on the sphere; both totals equal the degree.
    pub fn zeros_poles(&self) -> (&Multiset, &Multiset) {
        (&self.zeros, &self.poles)
    }

    pub fn zeros(&self) -> &Multiset {
        &self.zeros
    }

    pub fn poles(&self) -> &Multiset {
        &self.poles
    }

    /// Critical points on the sphere, total multiplicity `2k - 2`.
    pub fn critical_points(&self) -> Result<&Multiset, RatError> {
        if self.degree() == 0 {
            return Err(RatError::DegreeZero);
        }
        Ok(&self.critical)
    }

    /// Images of the critical points, with coincident values merged.
    pub fn critical_values(&self) -> Result<Multiset, RatError> {
        let mut out = Multiset::new();
        for &(p, k) in self.critical_points()?.iter() {
            out.push(self.eval_sphere(p)?, k);
        }
        Ok(out.merged(1e-9))
    }

    /// `r(z)` for finite `z`; returns a non-finite value at poles.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.num.eval(z) / self.den.eval(z)
    }

    /// `|r(z)|`, `f64::INFINITY` at poles.
    pub fn abs(&self, z: Complex64) -> f64 {
        let d = self.den.eval(z).norm();
        let n = self.num.eval(z).norm();
        if d == 0.0 {
            f64::INFINITY
        } else {
            n / d
        }
    }

    /// `r'(z)`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let (n, dn) = (self.num.eval(z), self.dnum.eval(z));
        let (d, dd) = (self.den.eval(z), self.dden.eval(z));
        (dn * d - n * dd) / (d * d)
    }

    /// Logarithmic derivative `r'/r`.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        self.dnum.eval(z) / self.num.eval(z) - self.dden.eval(z) / self.den.eval(z)
    }

    /// Evaluation on the sphere; poles and infinity handled in the `1/z` chart.
    pub fn eval_sphere(&self, p: SpherePoint) -> Result<SpherePoint, RatError> {
        match p {
            SpherePoint::Finite(z) => {
                let d = self.den.eval(z);
                let n = self.num.eval(z);
                if d.norm() <= 1e-14 * self.den.magnitude_at(z) {
                    if n.norm() <= 1e-14 * self.num.magnitude_at(z) {
                        return Err(RatError::Indeterminate(p));
                    }
                    return Ok(SpherePoint::Infinity);
                }
                Ok(SpherePoint::from_complex(n / d))
            }
            SpherePoint::Infinity => {
                let dn = self.num.degree();
                let dd = self.den.degree().unwrap_or(0);
                match dn {
                    None => Ok(SpherePoint::finite(0.0, 0.0)),
                    Some(dn) if dn > dd => Ok(SpherePoint::Infinity),
                    Some(dn) if dn < dd => Ok(SpherePoint::finite(0.0, 0.0)),
                    Some(_) => Ok(SpherePoint::Finite(self.num.leading() / self.den.leading())),
                }
            }
        }
    }

    /// `s r(z)` as a new map; `scaled(1 / c)` moves the level `c` to 1.
    pub fn scaled(&self, s: f64) -> Result<RationalMap, RatError> {
        RationalMap::new(self.num.scale(Complex64::new(s, 0.0)), self.den.clone())
    }

    /// `r(e^{i t} z)`, a rotation of the domain.
    pub fn precompose_rotation(&self, t: f64) -> Result<RationalMap, RatError> {
        let rot = |p: &Poly| {
            Poly::new(
                p.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * Complex64::from_polar(1.0, t * k as f64))
                    .collect(),
            )
        };
        RationalMap::new(rot(&self.num), rot(&self.den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn has(m: &Multiset, p: SpherePoint, k: usize, tol: f64) -> bool {
        m.iter().any(|(q, j)| *j == k && q.chordal_distance(&p) <= tol)
    }

    #[test]
    fn horner_examples() {
        let p = Poly::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(p.eval(c(0.0, 0.0)), c(-1.0, 0.0));
        assert_eq!(p.eval(c(1.0, 0.0)), c(0.0, 0.0));
        // (z-1)(z-2)(z-3) = z^3 - 6z^2 + 11z - 6
        let q = Poly::from_real(&[-6.0, 11.0, -6.0, 1.0]);
        assert_eq!(q.eval(c(4.0, 0.0)), c(6.0, 0.0));
        assert_eq!(Poly::from_roots(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]), q);
    }

    #[test]
    fn zero_polynomial_is_flagged() {
        let z = Poly::from_real(&[0.0, 0.0]);
        assert!(z.is_zero());
        assert_eq!(z.degree(), None);
        assert_eq!(z.degree_signed(), -1);
        assert!(matches!(z.roots(1e-8), Err(RatError::ConstantPolynomial(-1))));
    }

    #[test]
    fn simple_and_multiple_roots() {
        let r = Poly::from_real(&[-1.0, 0.0, 1.0]).roots(CLUSTER_TOL).unwrap();
        assert_eq!(r.total(), 2);
        assert!(has(&r, SpherePoint::finite(1.0, 0.0), 1, 1e-12));
        assert!(has(&r, SpherePoint::finite(-1.0, 0.0), 1, 1e-12));

        let r = Poly::from_real(&[0.0, 0.0, 0.0, 1.0]).roots(CLUSTER_TOL).unwrap();
        assert_eq!(r.entries(), &[(SpherePoint::finite(0.0, 0.0), 3)]);

        let r = Poly::from_real(&[-6.0, 11.0, -6.0, 1.0]).roots(CLUSTER_TOL).unwrap();
        assert_eq!(r.len(), 3);
        for x in [1.0, 2.0, 3.0] {
            assert!(has(&r, SpherePoint::finite(x, 0.0), 1, 1e-10));
        }
    }

    #[test]
    fn noisy_multiple_root_is_clustered() {
        // (z-1)^3 (z+2): the triple root is only accurate to ~1e-5 in floating point
        let p = Poly::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)]);
        let r = p.roots(CLUSTER_TOL).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        assert!(has(&r, SpherePoint::finite(1.0, 0.0), 3, 1e-6));
        assert!(has(&r, SpherePoint::finite(-2.0, 0.0), 1, 1e-10));
    }

    #[test]
    fn critical_points_examples() {
        let r = RationalMap::polynomial(Poly::z()).unwrap();
        assert!(r.critical_points().unwrap().is_empty());

        let r = RationalMap::polynomial(Poly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        let cp = r.critical_points().unwrap();
        assert_eq!(cp.total(), 2);
        assert!(has(cp, SpherePoint::finite(0.0, 0.0), 1, 1e-12));
        assert!(has(cp, SpherePoint::Infinity, 1, 0.0));

        // z + 1/z = (z^2 + 1) / z
        let r = RationalMap::new(Poly::from_real(&[1.0, 0.0, 1.0]), Poly::z()).unwrap();
        let cp = r.critical_points().unwrap();
        assert_eq!(cp.total(), 2);
        assert!(has(cp, SpherePoint::finite(1.0, 0.0), 1, 1e-12));
        assert!(has(cp, SpherePoint::finite(-1.0, 0.0), 1, 1e-12));
    }

    #[test]
    fn critical_values_examples() {
        let r = RationalMap::polynomial(Poly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        let cv = r.critical_values().unwrap();
        assert!(has(&cv, SpherePoint::finite(-1.0, 0.0), 1, 1e-12));
        assert!(has(&cv, SpherePoint::Infinity, 1, 0.0));

        let r = RationalMap::polynomial(Poly::from_real(&[-0.5, 0.0, 0.5])).unwrap();
        let cv = r.critical_values().unwrap();
        assert!(has(&cv, SpherePoint::finite(-0.5, 0.0), 1, 1e-12));
        assert!(has(&cv, SpherePoint::Infinity, 1, 0.0));

        let r = RationalMap::new(Poly::from_real(&[1.0, 0.0, 1.0]), Poly::z()).unwrap();
        let cv = r.critical_values().unwrap();
        assert!(has(&cv, SpherePoint::finite(2.0, 0.0), 1, 1e-12));
        assert!(has(&cv, SpherePoint::finite(-2.0, 0.0), 1, 1e-12));
    }

    #[test]
    fn double_pole_contributes_a_critical_point() {
        // 1/z^2: critical point of multiplicity 1 at the pole 0 and at the zero infinity
        let r = RationalMap::new(Poly::one(), Poly::from_real(&[0.0, 0.0, 1.0])).unwrap();
        let cp = r.critical_points().unwrap();
        assert_eq!(cp.total(), 2);
        assert!(has(cp, SpherePoint::finite(0.0, 0.0), 1, 1e-12));
        assert!(has(cp, SpherePoint::Infinity, 1, 0.0));
    }

    #[test]
    fn sphere_evaluation() {
        let r = RationalMap::polynomial(Poly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(r.eval_sphere(SpherePoint::Infinity).unwrap(), SpherePoint::Infinity);
        let inv = RationalMap::new(Poly::one(), Poly::z()).unwrap();
        assert_eq!(inv.eval_sphere(SpherePoint::finite(0.0, 0.0)).unwrap(), SpherePoint::Infinity);
        let m = RationalMap::new(Poly::from_real(&[1.0, 2.0]), Poly::from_real(&[3.0, 1.0])).unwrap();
        assert_eq!(m.eval_sphere(SpherePoint::Infinity).unwrap(), SpherePoint::finite(2.0, 0.0));
    }

    #[test]
    fn zeros_and_poles_bookkeeping() {
        let r = RationalMap::polynomial(Poly::from_real(&[-0.5, 0.0, 0.5])).unwrap();
        let (z, p) = r.zeros_poles();
        assert!(has(z, SpherePoint::finite(1.0, 0.0), 1, 1e-12));
        assert!(has(z, SpherePoint::finite(-1.0, 0.0), 1, 1e-12));
        assert_eq!(p.entries(), &[(SpherePoint::Infinity, 2)]);

        let r = RationalMap::new(Poly::one(), Poly::z()).unwrap();
        assert_eq!(r.zeros().entries(), &[(SpherePoint::Infinity, 1)]);
        assert!(has(r.poles(), SpherePoint::finite(0.0, 0.0), 1, 1e-12));

        // z / (z^2 - 4)
        let r = RationalMap::new(Poly::z(), Poly::from_real(&[-4.0, 0.0, 1.0])).unwrap();
        let (z, p) = r.zeros_poles();
        assert_eq!(z.total(), 2);
        assert!(has(z, SpherePoint::finite(0.0, 0.0), 1, 1e-12));
        assert!(has(z, SpherePoint::Infinity, 1, 0.0));
        assert!(has(p, SpherePoint::finite(2.0, 0.0), 1, 1e-12));
        assert!(has(p, SpherePoint::finite(-2.0, 0.0), 1, 1e-12));
    }

    #[test]
    fn common_root_is_rejected() {
        let num = Poly::from_roots(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let den = Poly::from_roots(&[c(1.0, 0.0)]);
        assert!(matches!(RationalMap::new(num, den), Err(RatError::CommonRoot(_))));
        assert!(matches!(
            RationalMap::new(Poly::one(), Poly::new(vec![])),
            Err(RatError::ZeroDenominator)
        ));
    }

    #[test]
    fn map_json_round_trip() {
        let r = RationalMap::from_json_str(r#"{"num": [[-1,0],[0,0],[1,0]], "den": [[1,0]]}"#).unwrap();
        assert_eq!(r.degree(), 2);
        assert!(r.is_polynomial());
        let back = RationalMap::from_json(&r.to_json()).unwrap();
        assert_eq!(back.num(), r.num());
    }

    #[test]
    fn sphere_point_json() {
        let s = serde_json::to_string(&vec![SpherePoint::finite(1.0, -2.0), SpherePoint::Infinity]).unwrap();
        assert_eq!(s, r#"[[1.0,-2.0],"inf"]"#);
        let back: Vec<SpherePoint> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[1], SpherePoint::Infinity);
    }
}
