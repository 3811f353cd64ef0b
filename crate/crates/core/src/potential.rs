//! Green's functions, harmonic measure by walk-on-spheres, and the exact
//! identities used as oracles for it.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{project_to_segment, PolylineCurve, SegmentHit, SegmentIndex};
use crate::lemgraph::LemGraph;
use crate::ratfun::{RationalMap, SpherePoint};

/// Walkers are absorbed within `EPS_REL * diameter` of the boundary.
pub const EPS_REL: f64 = 1e-4;
/// Steps after which a walker is stopped and attributed to its nearest boundary point.
pub const STEP_CAP: usize = 100_000;
/// Label collecting every walker not claimed by a partition arc.
pub const REST_LABEL: &str = "rest";

const CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("{0} lies outside the open unit disk")]
    OutsideDisk(Complex64),
    #[error("green function is singular at z = w = {0}")]
    Coincident(Complex64),
    #[error("base point {0} is not inside the region")]
    BaseOutside(SpherePoint),
    #[error("region has no boundary")]
    EmptyBoundary,
    #[error("an unbounded region needs a pole outside its closure; {0} is not one")]
    BadPole(Complex64),
    #[error("partition arc {label:?} on curve {curve} is invalid: {reason}")]
    BadPartition { label: String, curve: usize, reason: String },
    #[error("{capped} of {walkers} walkers hit the step cap")]
    StepCap { capped: usize, walkers: usize },
    #[error("argument of p reverses along the arc near sample {0}; subdivide the arc")]
    NotInjective(usize),
    #[error("p vanishes on the arc near sample {0}")]
    ZeroOnArc(usize),
    #[error("walker count must be positive")]
    NoWalkers,
}

/// Monte Carlo estimate of a probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub stderr: f64,
    pub walkers: u64,
    pub seed: u64,
}

impl MeasureEstimate {
    pub fn from_count(hits: u64, walkers: u64, seed: u64) -> Self {
        let value = hits as f64 / walkers as f64;
        MeasureEstimate {
            value,
            stderr: (value * (1.0 - value) / walkers as f64).sqrt(),
            walkers,
            seed,
        }
    }
}

/// Green's function of the unit disk, `log|1 - conj(w) z| - log|z - w|`.
pub fn green_disk(z: Complex64, w: Complex64) -> Result<f64, PotentialError> {
    for p in [z, w] {
        if p.norm() >= 1.0 {
            return Err(PotentialError::OutsideDisk(p));
        }
    }
    if z == w {
        return Err(PotentialError::Coincident(z));
    }
    Ok((Complex64::new(1.0, 0.0) - w.conj() * z).norm().ln() - (z - w).norm().ln())
}

/// `|log|B(z)| + sum_k g(z, w_k)|` for the Blaschke product with zeros `w_k`.
pub fn check_prop27(zeros: &[Complex64], z: Complex64) -> Result<f64, PotentialError> {
    let mut log_b = 0.0;
    let mut green = 0.0;
    for &w in zeros {
        log_b += ((z - w) / (Complex64::new(1.0, 0.0) - w.conj() * z)).norm().ln();
        green += green_disk(z, w)?;
    }
    Ok((log_b + green).abs())
}

/// Harmonic measure of the arc `{e^{it} : t0 <= t <= t1}` of the unit circle
/// seen from `w`, by composite Simpson quadrature of the Poisson kernel.
pub fn poisson_arc_measure(w: Complex64, t0: f64, t1: f64) -> f64 {
    let m = 20_000;
    let h = (t1 - t0) / m as f64;
    let kernel = |t: f64| (1.0 - w.norm_sqr()) / (Complex64::from_polar(1.0, t) - w).norm_sqr();
    let mut sum = kernel(t0) + kernel(t1);
    for k in 1..m {
        sum += kernel(t0 + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0 / (2.0 * PI)
}

/// A planar domain given by its boundary components and one interior reference.
#[derive(Clone, Debug)]
pub struct Region {
    components: Vec<Vec<PolylineCurve>>,
    reference: Complex64,
    /// For unbounded regions: a point outside the closure, used as the centre
    /// of the inversion that makes the region bounded.
    pole: Option<Complex64>,
}

impl Region {
    pub fn bounded(components: Vec<Vec<PolylineCurve>>, interior: Complex64) -> Result<Self, PotentialError> {
        if components.iter().all(|c| c.is_empty()) {
            return Err(PotentialError::EmptyBoundary);
        }
        Ok(Region {
            components,
            reference: interior,
            pole: None,
        })
    }

    /// The region containing infinity; `pole` must lie outside its closure.
    pub fn unbounded(components: Vec<Vec<PolylineCurve>>, pole: Complex64) -> Result<Self, PotentialError> {
        if components.iter().all(|c| c.is_empty()) {
            return Err(PotentialError::EmptyBoundary);
        }
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for c in components.iter().flatten() {
            let (a, b) = c.bbox();
            lo = Complex64::new(lo.re.min(a.re), lo.im.min(a.im));
            hi = Complex64::new(hi.re.max(b.re), hi.im.max(b.im));
        }
        let far = hi + (hi - lo) * 3.0 + Complex64::new(1.0, 0.731);
        let region = Region {
            components,
            reference: far,
            pole: Some(pole),
        };
        if region.contains(SpherePoint::Finite(pole)) || region.distance_to_boundary(pole) == 0.0 {
            return Err(PotentialError::BadPole(pole));
        }
        Ok(region)
    }

    /// The region of a face; the inversion pole of an unbounded face is the
    /// representative of the face across its first boundary edge.
    pub fn from_face(g: &LemGraph, face: usize) -> Result<Self, PotentialError> {
        let f = &g.faces[face];
        let components: Vec<Vec<PolylineCurve>> = f
            .boundary
            .iter()
            .map(|comp| comp.iter().map(|d| g.edges[d.edge].curve.clone()).collect())
            .collect();
        if f.unbounded {
            let first = f.boundary_edges().next().ok_or(PotentialError::EmptyBoundary)?;
            let e = &g.edges[first.edge];
            let other = if e.left == face { e.right } else { e.left };
            Region::unbounded(components, g.faces[other].representative)
        } else {
            Region::bounded(components, f.representative)
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.pole.is_some()
    }

    pub fn components(&self) -> &[Vec<PolylineCurve>] {
        &self.components
    }

    /// All boundary curves, flattened in component order; partitions index into this.
    pub fn curves(&self) -> Vec<&PolylineCurve> {
        self.components.iter().flatten().collect()
    }

    /// Index range in [`Region::curves`] of boundary component `j`.
    pub fn component_curves(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.components[..j].iter().map(Vec::len).sum();
        start..start + self.components[j].len()
    }

    fn distance_to_boundary(&self, z: Complex64) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|c| c.distance_to(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Parity test against every boundary component: a point is inside when
    /// a horizontal ray from it crosses each component with the same parity
    /// as a ray from the reference point.
    pub fn contains(&self, p: SpherePoint) -> bool {
        let z = match p {
            SpherePoint::Infinity => return self.is_unbounded(),
            SpherePoint::Finite(z) => z,
        };
        if self.distance_to_boundary(z) == 0.0 {
            return false;
        }
        self.components
            .iter()
            .all(|comp| ray_parity(comp, z) == ray_parity(comp, self.reference))
    }
}

fn ray_parity(curves: &[PolylineCurve], z: Complex64) -> bool {
    let mut odd = false;
    for c in curves {
        for (a, b) in c.segments() {
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
                if x > z.re {
                    odd = !odd;
                }
            }
        }
    }
    odd
}

/// A labelled sub-arc `s0..s1` (arclength) of boundary curve `curve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledArc {
    pub label: String,
    pub curve: usize,
    pub s0: f64,
    pub s1: f64,
}

/// Disjoint labelled arcs; labels may repeat to form unions of arcs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPartition {
    pub arcs: Vec<LabeledArc>,
}

impl BoundaryPartition {
    pub fn new(arcs: Vec<LabeledArc>) -> Self {
        BoundaryPartition { arcs }
    }

    /// Labels in order of first appearance.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for a in &self.arcs {
            if !out.contains(&a.label) {
                out.push(a.label.clone());
            }
        }
        out
    }

    /// Each listed curve as one arc with the given label.
    pub fn whole_curves(curves: &[&PolylineCurve], indices: impl IntoIterator<Item = usize>, label: &str) -> Self {
        BoundaryPartition {
            arcs: indices
                .into_iter()
                .map(|i| LabeledArc {
                    label: label.to_string(),
                    curve: i,
                    s0: 0.0,
                    s1: curves[i].length(),
                })
                .collect(),
        }
    }

    /// Splits curve `curve` into `2^level` arcs of equal length labelled `prefix/k`.
    pub fn dyadic(curve_idx: usize, curve: &PolylineCurve, level: u32, prefix: &str) -> Self {
        let m = 1usize << level;
        let len = curve.length();
        BoundaryPartition {
            arcs: (0..m)
                .map(|k| LabeledArc {
                    label: format!("{prefix}/{k}"),
                    curve: curve_idx,
                    s0: len * k as f64 / m as f64,
                    s1: len * (k + 1) as f64 / m as f64,
                })
                .collect(),
        }
    }

    fn validate(&self, curves: &[&PolylineCurve]) -> Result<(), PotentialError> {
        let bad = |a: &LabeledArc, reason: &str| PotentialError::BadPartition {
            label: a.label.clone(),
            curve: a.curve,
            reason: reason.to_string(),
        };
        for a in &self.arcs {
            let Some(c) = curves.get(a.curve) else {
                return Err(bad(a, "no such curve"));
            };
            let tol = 1e-12 * c.length().max(1.0);
            if !(a.s0 >= -tol && a.s1 <= c.length() + tol && a.s0 < a.s1) {
                return Err(bad(a, "interval not inside the curve"));
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            for b in &self.arcs[i + 1..] {
                if a.curve == b.curve && a.s0 < b.s1 && b.s0 < a.s1 {
                    return Err(bad(b, &format!("overlaps arc {:?}", a.label)));
                }
            }
        }
        Ok(())
    }
}

/// Per-label estimates; the last entry is [`REST_LABEL`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicMeasure {
    pub estimates: Vec<(String, MeasureEstimate)>,
    pub capped: u64,
}

impl HarmonicMeasure {
    pub fn get(&self, label: &str) -> Option<&MeasureEstimate> {
        self.estimates.iter().find(|(l, _)| l == label).map(|(_, e)| e)
    }
}

/// Bucketed boundary segments over a square grid. Cells near the boundary
/// keep the segments within `reach` of them; the others keep a Chebyshev
/// cell distance to the nearest such cell, which bounds the boundary
/// distance from below.
struct BoundaryGrid {
    lo: Complex64,
    h: f64,
    n: usize,
    reach: f64,
    segments: Vec<(Complex64, Complex64, u32, u32)>,
    offsets: Vec<u32>,
    bucket: Vec<u32>,
    rings: Vec<u32>,
    fallback: SegmentIndex,
}

/// Result of a distance query: exact with the closest segment, or a lower bound.
enum Probe {
    Exact(SegmentHit),
    Clear(f64),
}

impl BoundaryGrid {
    const CELLS: usize = 512;

    fn new(curves: &[&PolylineCurve]) -> Self {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for c in curves {
            let (a, b) = c.bbox();
            lo = Complex64::new(lo.re.min(a.re), lo.im.min(a.im));
            hi = Complex64::new(hi.re.max(b.re), hi.im.max(b.im));
        }
        let side = (hi.re - lo.re).max(hi.im - lo.im).max(1e-300) * 1.02;
        let n = Self::CELLS;
        let h = side / n as f64;
        let reach = 2.0 * h * std::f64::consts::SQRT_2;
        let lo = (lo + hi) * 0.5 - Complex64::new(side, side) * 0.5;
        let segments: Vec<_> = curves
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| c.segments().enumerate().map(move |(si, (a, b))| (a, b, ci as u32, si as u32)))
            .collect();
        let cell_range = |a: Complex64, b: Complex64| {
            let f = |x: f64, o: f64| (((x - o) / h).floor().max(0.0) as usize).min(n - 1);
            (
                f(a.re.min(b.re) - reach, lo.re),
                f(a.re.max(b.re) + reach, lo.re),
                f(a.im.min(b.im) - reach, lo.im),
                f(a.im.max(b.im) + reach, lo.im),
            )
        };
        let mut counts = vec![0u32; n * n + 1];
        for &(a, b, _, _) in &segments {
            let (i0, i1, j0, j1) = cell_range(a, b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    counts[j * n + i + 1] += 1;
                }
            }
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut bucket = vec![0u32; *offsets.last().unwrap() as usize];
        for (k, &(a, b, _, _)) in segments.iter().enumerate() {
            let (i0, i1, j0, j1) = cell_range(a, b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    bucket[fill[j * n + i] as usize] = k as u32;
                    fill[j * n + i] += 1;
                }
            }
        }
        // two-pass chessboard distance transform from the non-empty cells
        let big = u32::MAX / 2;
        let mut rings: Vec<u32> = (0..n * n)
            .map(|c| if offsets[c + 1] > offsets[c] { 0 } else { big })
            .collect();
        for j in 0..n {
            for i in 0..n {
                let mut v = rings[j * n + i];
                for (di, dj) in [(-1i64, -1i64), (0, -1), (1, -1), (-1, 0)] {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a >= 0 && b >= 0 && (a as usize) < n {
                        v = v.min(rings[b as usize * n + a as usize] + 1);
                    }
                }
                rings[j * n + i] = v;
            }
        }
        for j in (0..n).rev() {
            for i in (0..n).rev() {
                let mut v = rings[j * n + i];
                for (di, dj) in [(1i64, 1i64), (0, 1), (-1, 1), (1, 0)] {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a >= 0 && (a as usize) < n && (b as usize) < n {
                        v = v.min(rings[b as usize * n + a as usize] + 1);
                    }
                }
                rings[j * n + i] = v;
            }
        }
        BoundaryGrid {
            lo,
            h,
            n,
            reach,
            segments,
            offsets,
            bucket,
            rings,
            fallback: SegmentIndex::new(curves),
        }
    }

    fn probe(&self, x: Complex64) -> Probe {
        let fi = (x.re - self.lo.re) / self.h;
        let fj = (x.im - self.lo.im) / self.h;
        if !(fi >= 0.0 && fj >= 0.0 && fi < self.n as f64 && fj < self.n as f64) {
            return Probe::Exact(self.fallback.nearest(x).expect("non-empty boundary"));
        }
        let (i, j) = (fi as usize, fj as usize);
        let c = j * self.n + i;
        let k = self.rings[c];
        if k > 0 {
            let centre = self.lo + Complex64::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h);
            return Probe::Clear((k as f64 - 0.5) * self.h + self.reach - (x - centre).norm());
        }
        let mut best: Option<SegmentHit> = None;
        for &k in &self.bucket[self.offsets[c] as usize..self.offsets[c + 1] as usize] {
            let (a, b, ci, si) = self.segments[k as usize];
            let (t, d) = project_to_segment(x, a, b);
            if best.is_none_or(|h| d < h.distance) {
                best = Some(SegmentHit {
                    curve: ci as usize,
                    segment: si as usize,
                    t,
                    distance: d,
                });
            }
        }
        match best {
            Some(hit) if hit.distance <= self.reach => Probe::Exact(hit),
            _ => Probe::Clear(self.reach),
        }
    }
}

enum Attribution {
    /// `lookup[curve]` lists `(s0, s1, label index)` sorted by `s0`; misses go to `rest`.
    Arcs { lookup: Vec<Vec<(f64, f64, usize)>>, rest: usize },
    /// One bin per segment; `offsets[curve]` is the bin of its first segment.
    Segments { offsets: Vec<usize> },
}

impl Attribution {
    fn bins(&self) -> usize {
        match self {
            Attribution::Arcs { rest, .. } => rest + 1,
            Attribution::Segments { offsets } => *offsets.last().unwrap(),
        }
    }
}

struct Walker<'a> {
    grid: BoundaryGrid,
    original: Vec<&'a PolylineCurve>,
    pole: Option<Complex64>,
    eps: f64,
    attribution: Attribution,
}

impl Walker<'_> {
    fn label_of(&self, hit: SegmentHit, x: Complex64) -> usize {
        let (lookup, rest) = match &self.attribution {
            Attribution::Segments { offsets } => return offsets[hit.curve] + hit.segment,
            Attribution::Arcs { lookup, rest } => (lookup, *rest),
        };
        let c = self.original[hit.curve];
        let t = match self.pole {
            None => hit.t,
            Some(q) => {
                let z = q + Complex64::new(1.0, 0.0) / x;
                let (a, b) = c.segment(hit.segment);
                project_to_segment(z, a, b).0
            }
        };
        let s = c.arclength_at(hit.segment, t);
        let arcs = &lookup[hit.curve];
        let k = arcs.partition_point(|&(s0, _, _)| s0 <= s);
        match k.checked_sub(1).map(|k| arcs[k]) {
            Some((_, s1, l)) if s < s1 || s1 >= c.length() => l,
            _ => rest,
        }
    }

    /// Returns the label index hit and whether the step cap stopped the walk.
    fn walk(&self, start: Complex64, rng: &mut ChaCha8Rng) -> (usize, bool) {
        let mut x = start;
        let mut steps = 0;
        loop {
            let radius = match self.grid.probe(x) {
                Probe::Exact(hit) => {
                    if hit.distance <= self.eps || steps >= STEP_CAP {
                        return (self.label_of(hit, x), steps >= STEP_CAP);
                    }
                    hit.distance
                }
                Probe::Clear(r) => r,
            };
            let theta = (rng.next_u64() >> 11) as f64 * (2.0 * PI / (1u64 << 53) as f64);
            x += Complex64::from_polar(radius, theta);
            steps += 1;
        }
    }
}

/// Walk-on-spheres estimate of the harmonic measure of each partition label
/// seen from `base`. Walker `i` draws from the ChaCha8 stream `i` of `seed`,
/// so the result does not depend on the thread count.
pub fn harmonic_measure_mc(
    region: &Region,
    base: SpherePoint,
    partition: &BoundaryPartition,
    walkers: u64,
    seed: u64,
) -> Result<HarmonicMeasure, PotentialError> {
    let original = region.curves();
    partition.validate(&original)?;
    let labels = partition.labels();
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let rest = labels.len();
    let mut lookup = vec![Vec::new(); original.len()];
    for a in &partition.arcs {
        lookup[a.curve].push((a.s0, a.s1, index[a.label.as_str()]));
    }
    for arcs in &mut lookup {
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let (counts, capped) = run_walkers(region, base, Attribution::Arcs { lookup, rest }, walkers, seed)?;
    let estimates = labels
        .into_iter()
        .chain(std::iter::once(REST_LABEL.to_string()))
        .zip(counts)
        .map(|(l, n)| (l, MeasureEstimate::from_count(n, walkers, seed)))
        .collect();
    Ok(HarmonicMeasure { estimates, capped })
}

/// Walker counts per boundary segment, `counts[curve][segment]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentCounts {
    pub counts: Vec<Vec<u64>>,
    pub walkers: u64,
    pub capped: u64,
}

/// Like [`harmonic_measure_mc`] with one bin per boundary segment.
pub fn segment_measures(region: &Region, base: SpherePoint, walkers: u64, seed: u64) -> Result<SegmentCounts, PotentialError> {
    let curves = region.curves();
    let mut offsets = vec![0];
    for c in &curves {
        offsets.push(offsets.last().unwrap() + c.num_segments());
    }
    let (flat, capped) = run_walkers(region, base, Attribution::Segments { offsets: offsets.clone() }, walkers, seed)?;
    let counts = offsets.windows(2).map(|w| flat[w[0]..w[1]].to_vec()).collect();
    Ok(SegmentCounts { counts, walkers, capped })
}

fn run_walkers(
    region: &Region,
    base: SpherePoint,
    attribution: Attribution,
    walkers: u64,
    seed: u64,
) -> Result<(Vec<u64>, u64), PotentialError> {
    if walkers == 0 {
        return Err(PotentialError::NoWalkers);
    }
    if !region.contains(base) {
        return Err(PotentialError::BaseOutside(base));
    }
    let original = region.curves();
    let (curves, start) = match region.pole {
        None => (
            original.iter().map(|&c| c.clone()).collect::<Vec<_>>(),
            base.as_finite().expect("bounded region contains only finite points"),
        ),
        Some(q) => {
            let inv = |z: Complex64| Complex64::new(1.0, 0.0) / (z - q);
            let mapped = original
                .iter()
                .map(|c| PolylineCurve::new(c.points().iter().map(|&z| inv(z)).collect(), c.is_closed()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| PotentialError::BadPole(q))?;
            let start = match base {
                SpherePoint::Infinity => Complex64::new(0.0, 0.0),
                SpherePoint::Finite(z) => inv(z),
            };
            (mapped, start)
        }
    };
    let refs: Vec<&PolylineCurve> = curves.iter().collect();
    let bins = attribution.bins();
    let walker = Walker {
        grid: BoundaryGrid::new(&refs),
        original,
        pole: region.pole,
        eps: EPS_REL * bbox_diameter(&refs),
        attribution,
    };

    let chunks = walkers.div_ceil(CHUNK as u64);
    let (counts, capped) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut counts = vec![0u64; bins];
            let mut capped = 0u64;
            let lo = chunk * CHUNK as u64;
            let hi = (lo + CHUNK as u64).min(walkers);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in lo..hi {
                rng.set_stream(i);
                rng.set_word_pos(0);
                let (l, cap) = walker.walk(start, &mut rng);
                counts[l] += 1;
                capped += cap as u64;
            }
            (counts, capped)
        })
        .reduce(
            || (vec![0u64; bins], 0),
            |(mut a, ca), (b, cb)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                (a, ca + cb)
            },
        );
    if capped * 1000 >= walkers {
        return Err(PotentialError::StepCap {
            capped: capped as usize,
            walkers: walkers as usize,
        });
    }
    Ok((counts, capped))
}

fn bbox_diameter(curves: &[&PolylineCurve]) -> f64 {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for c in curves {
        let (a, b) = c.bbox();
        lo = Complex64::new(lo.re.min(a.re), lo.im.min(a.im));
        hi = Complex64::new(hi.re.max(b.re), hi.im.max(b.im));
    }
    (hi - lo).norm()
}

/// `(1/2pi)|Delta arg p|` along the arc `s0..s1` of `curve`; this equals the
/// summed harmonic measure of the arc from the zeros of `p` in a face where
/// `p` is proper. Errors if the argument is not monotone along the arc.
pub fn arc_measure_oracle(p: &RationalMap, curve: &PolylineCurve, s0: f64, s1: f64) -> Result<f64, PotentialError> {
    let table = curve.arclength_table();
    let mut samples = vec![curve.point_at(s0)];
    for (i, &s) in table.iter().enumerate().take(curve.num_segments() + 1) {
        if s > s0 && s < s1 {
            samples.push(curve.points()[i % curve.points().len()]);
        }
    }
    samples.push(curve.point_at(s1));
    let mut total = 0.0;
    let mut sign = 0.0;
    let mut prev = p.eval(samples[0]);
    for (k, &z) in samples.iter().enumerate().skip(1) {
        let v = p.eval(z);
        if v.norm() == 0.0 {
            return Err(PotentialError::ZeroOnArc(k));
        }
        let d = (v / prev).arg();
        if d != 0.0 {
            if sign == 0.0 {
                sign = d.signum();
            } else if d.signum() != sign && d.abs() > 1e-12 {
                return Err(PotentialError::NotInjective(k));
            }
        }
        total += d;
        prev = v;
    }
    Ok(total.abs() / (2.0 * PI))
}

/// Summed measure of one boundary component from a family of points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralityResult {
    pub estimate: f64,
    pub stderr: f64,
    pub nearest: i64,
    pub z_score: f64,
    pub integer: bool,
}

/// Estimates `sum_k m_k * omega(Gamma_j, z_k, region)` and tests it for
/// integrality at three standard errors. Point `k` uses seed `seed + k`.
pub fn integrality_check(
    region: &Region,
    points: &[(SpherePoint, usize)],
    component: usize,
    walkers: u64,
    seed: u64,
) -> Result<IntegralityResult, PotentialError> {
    let curves = region.curves();
    let partition = BoundaryPartition::whole_curves(&curves, region.component_curves(component), "gamma");
    let mut estimate = 0.0;
    let mut var = 0.0;
    for (k, &(p, m)) in points.iter().enumerate() {
        let h = harmonic_measure_mc(region, p, &partition, walkers, seed.wrapping_add(k as u64))?;
        let e = h.get("gamma").unwrap();
        estimate += m as f64 * e.value;
        var += (m as f64 * e.stderr).powi(2);
    }
    let stderr = var.sqrt();
    let nearest = estimate.round() as i64;
    let gap = (estimate - nearest as f64).abs();
    let z_score = if stderr > 0.0 { gap / stderr } else if gap == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(IntegralityResult {
        estimate,
        stderr,
        nearest,
        z_score,
        integer: z_score <= 3.0,
    })
}
