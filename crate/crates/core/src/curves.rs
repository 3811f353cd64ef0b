//! Polyline curves and the planar predicates built on them.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rstar::primitives::{GeomWithData, Line};
use rstar::RTree;
use serde::Serialize;
use thiserror::Error;

/// Distance below which a query point counts as lying on the curve.
pub const ON_CURVE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("a polyline needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("consecutive points {0} and {1} coincide")]
    RepeatedPoint(usize, usize),
    #[error("operation needs a closed curve")]
    NotClosed,
    #[error("point {0} lies on the curve (distance {1:.3e})")]
    OnCurve(Complex64, f64),
    #[error("curve is degenerate: all points are collinear")]
    Degenerate,
    #[error("curve is not a Jordan curve: segments {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolylineCurve {
    points: Vec<Complex64>,
    closed: bool,
    cumulative: Vec<f64>,
}

impl PolylineCurve {
    /// Builds a curve; a closed curve whose last point repeats the first has
    /// the repeat dropped.
    pub fn new(mut points: Vec<Complex64>, closed: bool) -> Result<Self, CurveError> {
        if closed && points.len() > 2 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 2 {
            return Err(CurveError::TooFewPoints(points.len()));
        }
        for i in 1..points.len() {
            if points[i] == points[i - 1] {
                return Err(CurveError::RepeatedPoint(i - 1, i));
            }
        }
        let mut cumulative = Vec::with_capacity(points.len() + 1);
        cumulative.push(0.0);
        let nseg = if closed { points.len() } else { points.len() - 1 };
        let mut acc = 0.0;
        for i in 0..nseg {
            acc += (points[(i + 1) % points.len()] - points[i]).norm();
            cumulative.push(acc);
        }
        Ok(PolylineCurve {
            points,
            closed,
            cumulative,
        })
    }

    /// Like [`PolylineCurve::new`] but silently drops consecutive duplicates.
    pub fn new_dedup(points: Vec<Complex64>, closed: bool) -> Result<Self, CurveError> {
        let mut pts: Vec<Complex64> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        if closed {
            while pts.len() > 2 && pts.first() == pts.last() {
                pts.pop();
            }
        }
        PolylineCurve::new(pts, closed)
    }

    /// Circle sampled at `n` equally spaced points, counterclockwise from angle 0.
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Self {
        Self::ellipse(center, radius, radius, n)
    }

    pub fn ellipse(center: Complex64, a: f64, b: f64, n: usize) -> Self {
        let pts = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                center + Complex64::new(a * t.cos(), b * t.sin())
            })
            .collect();
        PolylineCurve::new(pts, true).expect("ellipse sample")
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn num_segments(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn segment(&self, i: usize) -> (Complex64, Complex64) {
        (self.points[i], self.points[(i + 1) % self.points.len()])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        (0..self.num_segments()).map(move |i| self.segment(i))
    }

    /// Cumulative arclength at the start of each segment, plus the total at the end.
    pub fn arclength_table(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Arclength position of parameter `t` along segment `i`.
    pub fn arclength_at(&self, i: usize, t: f64) -> f64 {
        self.cumulative[i] + t * (self.cumulative[i + 1] - self.cumulative[i])
    }

    /// Point at arclength `s` (clamped to `[0, length]`).
    pub fn point_at(&self, s: f64) -> Complex64 {
        let s = s.clamp(0.0, self.length());
        let i = match self.cumulative.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.num_segments() - 1),
            Err(i) => i - 1,
        };
        let (a, b) = self.segment(i);
        let len = self.cumulative[i + 1] - self.cumulative[i];
        a + (b - a) * ((s - self.cumulative[i]) / len)
    }

    pub fn reversed(&self) -> PolylineCurve {
        let mut pts = self.points.clone();
        if self.closed {
            pts[1..].reverse();
        } else {
            pts.reverse();
        }
        PolylineCurve::new(pts, self.closed).expect("reversal keeps validity")
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<PolylineCurve, CurveError> {
        PolylineCurve::new_dedup(self.points.iter().map(|&z| f(z)).collect(), self.closed)
    }

    /// Twice the signed area (shoelace); positive for counterclockwise curves.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let mut a = 0.0;
        for i in 0..n {
            let p = self.points[i];
            let q = self.points[(i + 1) % n];
            a += p.re * q.im - q.re * p.im;
        }
        0.5 * a
    }

    pub fn diameter_bound(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    pub fn bbox(&self) -> (Complex64, Complex64) {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        (lo, hi)
    }

    /// Smallest distance from `z` to the curve.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.segments()
            .map(|(a, b)| point_segment_distance(z, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Winding number of a closed curve around `z`.
    pub fn winding_number(&self, z: Complex64) -> Result<i32, CurveError> {
        if !self.closed {
            return Err(CurveError::NotClosed);
        }
        let d = self.distance_to(z);
        if d <= ON_CURVE_TOL {
            return Err(CurveError::OnCurve(z, d));
        }
        Ok(self.winding_unchecked(z))
    }

    /// Crossing-number winding count, without the on-curve check.
    pub(crate) fn winding_unchecked(&self, z: Complex64) -> i32 {
        let mut w = 0;
        for (a, b) in self.segments() {
            if a.im <= z.im {
                if b.im > z.im && orient(a, b, z) > 0.0 {
                    w += 1;
                }
            } else if b.im <= z.im && orient(a, b, z) < 0.0 {
                w -= 1;
            }
        }
        w
    }

    /// First pair of non-adjacent intersecting segments, if any.
    ///
    /// Segments are bucketed on a uniform grid sized to the mean segment
    /// length, so the expected cost is linear in the number of segments.
    pub fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let nseg = self.num_segments();
        if nseg < 3 {
            return None;
        }
        let (lo, hi) = self.bbox();
        let mean = self.length() / nseg as f64;
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(mean);
        let cell = mean.max(span / 4096.0);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let key = |x: f64, y: f64| {
            (
                ((x - lo.re) / cell).floor() as i64,
                ((y - lo.im) / cell).floor() as i64,
            )
        };
        for i in 0..nseg {
            let (a, b) = self.segment(i);
            let (i0, j0) = key(a.re.min(b.re), a.im.min(b.im));
            let (i1, j1) = key(a.re.max(b.re), a.im.max(b.im));
            for ci in i0..=i1 {
                for cj in j0..=j1 {
                    buckets.entry((ci, cj)).or_default().push(i);
                }
            }
        }
        let adjacent = |i: usize, j: usize| {
            let d = i.abs_diff(j);
            d == 1 || (self.closed && d == nseg - 1)
        };
        let mut keys: Vec<_> = buckets.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            let segs = &buckets[&k];
            for (x, &i) in segs.iter().enumerate() {
                for &j in &segs[x + 1..] {
                    if i == j || adjacent(i, j) {
                        continue;
                    }
                    let (a, b) = self.segment(i);
                    let (c, d) = self.segment(j);
                    if segments_intersect(a, b, c, d) {
                        return Some((i.min(j), i.max(j)));
                    }
                }
            }
        }
        None
    }

    pub fn is_jordan(&self) -> bool {
        self.closed && self.find_self_intersection().is_none()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), CurveError> {
        writeln!(w, "re,im")?;
        for p in &self.points {
            writeln!(w, "{:?},{:?}", p.re, p.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, closed: bool) -> Result<Self, CurveError> {
        let mut pts = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (n == 0 && line == "re,im") {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64, CurveError> {
                s.ok_or_else(|| CurveError::Csv(format!("line {}: missing field", n + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| CurveError::Csv(format!("line {}: {e}", n + 1)))
            };
            let re = parse(it.next())?;
            let im = parse(it.next())?;
            pts.push(Complex64::new(re, im));
        }
        PolylineCurve::new(pts, closed)
    }
}

/// Orientation determinant of `(a, b, c)`; positive when `c` is left of `a -> b`.
pub fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

pub fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let (_, d) = project_to_segment(z, a, b);
    d
}

/// Parameter `t in [0, 1]` of the closest point on `[a, b]` and the distance to it.
pub fn project_to_segment(z: Complex64, a: Complex64, b: Complex64) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0)
    };
    (t, (z - (a + ab * t)).norm())
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Complex64, q: Complex64, r: Complex64| {
        r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
    };
    (d1 == 0.0 && on(c, d, a))
        || (d2 == 0.0 && on(c, d, b))
        || (d3 == 0.0 && on(a, b, c))
        || (d4 == 0.0 && on(a, b, d))
}

/// A segment located by curve index, segment index and parameter along it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentHit {
    pub curve: usize,
    pub segment: usize,
    pub t: f64,
    pub distance: f64,
}

type SegmentTree = RTree<GeomWithData<Line<[f64; 2]>, (u32, u32)>>;

/// R-tree over the segments of a family of polylines, for closest-point queries.
pub struct SegmentIndex {
    tree: SegmentTree,
    ends: Vec<Vec<(Complex64, Complex64)>>,
}

impl SegmentIndex {
    pub fn new(curves: &[&PolylineCurve]) -> Self {
        let mut items = Vec::new();
        let mut ends = Vec::with_capacity(curves.len());
        for (ci, c) in curves.iter().enumerate() {
            let segs: Vec<_> = c.segments().collect();
            for (si, (a, b)) in segs.iter().enumerate() {
                items.push(GeomWithData::new(
                    Line::new([a.re, a.im], [b.re, b.im]),
                    (ci as u32, si as u32),
                ));
            }
            ends.push(segs);
        }
        SegmentIndex {
            tree: RTree::bulk_load(items),
            ends,
        }
    }

    pub fn nearest(&self, z: Complex64) -> Option<SegmentHit> {
        let item = self.tree.nearest_neighbor(&[z.re, z.im])?;
        let (ci, si) = item.data;
        let (a, b) = self.ends[ci as usize][si as usize];
        let (t, distance) = project_to_segment(z, a, b);
        Some(SegmentHit {
            curve: ci as usize,
            segment: si as usize,
            t,
            distance,
        })
    }
}

/// Symmetric vertex-to-curve Hausdorff distance between two polylines.
pub fn hausdorff_distance(a: &PolylineCurve, b: &PolylineCurve) -> f64 {
    fn one_sided(from: &PolylineCurve, to: &PolylineCurve) -> f64 {
        let index = SegmentIndex::new(&[to]);
        from.points()
            .iter()
            .map(|&z| index.nearest(z).map_or(f64::INFINITY, |h| h.distance))
            .fold(0.0, f64::max)
    }
    one_sided(a, b).max(one_sided(b, a))
}

/// Supporting line found by [`halfplane_segment_hypothesis`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessLine {
    /// A point of the line.
    pub origin: Complex64,
    /// Unit direction; the curve lies in the closed half-plane to its left.
    pub direction: Complex64,
    /// First and last curve indices of the collinear run (cyclic order).
    pub run: (usize, usize),
    pub run_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum HalfplaneVerdict {
    Holds(WitnessLine),
    Fails,
}

/// Looks for a closed half-plane containing the curve whose boundary line
/// meets the curve in a single nondegenerate segment.
///
/// Only supporting lines through convex hull edges are searched; any such
/// boundary line must support the hull.
pub fn halfplane_segment_hypothesis(c: &PolylineCurve) -> Result<HalfplaneVerdict, CurveError> {
    if !c.is_closed() {
        return Err(CurveError::NotClosed);
    }
    if let Some((i, j)) = c.find_self_intersection() {
        return Err(CurveError::SelfIntersecting(i, j));
    }
    let hull = convex_hull(c.points());
    if hull.len() < 3 {
        return Err(CurveError::Degenerate);
    }
    let diam = c.diameter_bound();
    let line_tol = 1e-9 * diam.max(1.0);
    let slack = 1e-9 * diam.max(1.0);
    let min_span = 1e-6 * diam;
    let pts = c.points();
    let n = pts.len();

    for h in 0..hull.len() {
        let a = hull[h];
        let b = hull[(h + 1) % hull.len()];
        let dir = (b - a) / (b - a).norm();
        let signed = |p: Complex64| orient(a, a + dir, p);
        if pts.iter().any(|&p| signed(p) < -slack) {
            continue;
        }
        let contact: Vec<bool> = pts.iter().map(|&p| signed(p).abs() <= line_tol).collect();
        let count = contact.iter().filter(|&&x| x).count();
        if count < 3 || count == n {
            continue;
        }
        // start scanning just after a non-contact point so runs are not split by the wrap
        let start = (0..n).find(|&i| !contact[i]).unwrap();
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut k = 1;
        while k <= n {
            let i = (start + k) % n;
            if contact[i] {
                let first = i;
                let mut len = 1;
                while k + len <= n && contact[(start + k + len) % n] {
                    len += 1;
                }
                runs.push((first, len));
                k += len;
            } else {
                k += 1;
            }
        }
        if runs.len() != 1 || runs[0].1 < 3 {
            continue;
        }
        let (first, len) = runs[0];
        let last = (first + len - 1) % n;
        let proj: Vec<f64> = (0..len)
            .map(|m| ((pts[(first + m) % n] - a) * dir.conj()).re)
            .collect();
        let span = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - proj.iter().cloned().fold(f64::INFINITY, f64::min);
        if span >= min_span {
            return Ok(HalfplaneVerdict::Holds(WitnessLine {
                origin: a,
                direction: dir,
                run: (first, last),
                run_length: span,
            }));
        }
    }
    Ok(HalfplaneVerdict::Fails)
}

/// Counterclockwise convex hull (Andrew's monotone chain), collinear points dropped.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut p: Vec<Complex64> = points.to_vec();
    p.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
