//! Level-set extraction for `|r(z)| = c`.
//!
//! The level set is located by marching squares on `log|r| - log c` over a
//! square grid, every sample is then pushed back onto the level set by
//! Newton steps on `log r`, and critical points lying on the level set are
//! cut out as vertices.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curves::{CurveError, PolylineCurve};
use crate::ratfun::{RatError, RationalMap, SpherePoint};

/// Relative closeness of `|critical value|` to `c` for a critical point to become a vertex.
pub const VERTEX_LEVEL_TOL: f64 = 1e-6;
/// Newton stopping tolerance, relative to `c`.
pub const CORRECTION_TOL: f64 = 1e-12;
const NEWTON_MAX_ITERS: usize = 30;
const MIN_LOG_DERIVATIVE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("level must be positive and finite, got {0}")]
    BadLevel(f64),
    #[error("map has degree 0")]
    Constant,
    #[error("Newton correction failed at {0}: {1}")]
    Newton(Complex64, &'static str),
    #[error("level {0} passes through (or too close to) infinity; |r(inf)| = {1}")]
    LevelThroughInfinity(f64, f64),
    #[error("grid {n} too coarse: topology changes under refinement ({coarse} vs {fine}); increase the grid")]
    CoarseGrid { n: usize, coarse: String, fine: String },
    #[error("level set reaches the edge of the tracing box")]
    Unbounded,
    #[error(transparent)]
    Rat(#[from] RatError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Axis-aligned square grid: `n` cells per side, `(n + 1)^2` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub n: usize,
}

impl GridSpec {
    pub fn square(center: Complex64, half_width: f64, n: usize) -> Self {
        GridSpec {
            lo: [center.re - half_width, center.im - half_width],
            hi: [center.re + half_width, center.im + half_width],
            n,
        }
    }

    pub fn cell(&self) -> (f64, f64) {
        (
            (self.hi[0] - self.lo[0]) / self.n as f64,
            (self.hi[1] - self.lo[1]) / self.n as f64,
        )
    }

    pub fn cell_diagonal(&self) -> f64 {
        let (dx, dy) = self.cell();
        dx.hypot(dy)
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let (dx, dy) = self.cell();
        Complex64::new(self.lo[0] + i as f64 * dx, self.lo[1] + j as f64 * dy)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.lo[0] && z.re <= self.hi[0] && z.im >= self.lo[1] && z.im <= self.hi[1]
    }

    pub fn refined(&self) -> GridSpec {
        GridSpec { n: self.n * 2, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceVertex {
    pub point: SpherePoint,
    /// Edge ends meeting at the vertex, loops counted twice.
    pub degree: usize,
    /// `2(d + 1)` for a critical point of multiplicity `d`.
    pub expected_degree: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEdge {
    pub curve: PolylineCurve,
    /// Start and end vertex indices; `None` for a closed edge.
    pub ends: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct TraceResult {
    pub level: f64,
    pub edges: Vec<TraceEdge>,
    pub vertices: Vec<TraceVertex>,
    pub grid: GridSpec,
}

impl TraceResult {
    /// `(vertices, closed edges, open edges)`.
    pub fn signature(&self) -> (usize, usize, usize) {
        let closed = self.edges.iter().filter(|e| e.ends.is_none()).count();
        (self.vertices.len(), closed, self.edges.len() - closed)
    }

    /// True when the level set is a single vertex-free closed edge.
    pub fn is_jordan(&self) -> bool {
        self.vertices.is_empty() && self.edges.len() == 1 && self.edges[0].ends.is_none()
    }

    /// Largest `||r(z)| - c|` over every sample of every edge.
    pub fn max_level_residual(&self, r: &RationalMap) -> f64 {
        self.edges
            .iter()
            .flat_map(|e| e.curve.points().iter())
            .map(|&z| (r.abs(z) - self.level).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TraceOptions {
    pub grid_n: usize,
    /// Snap radius in units of the cell diagonal.
    pub snap_factor: f64,
    /// Re-run the topology at twice the resolution and compare.
    pub check_refinement: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            grid_n: 512,
            snap_factor: 10.0,
            check_refinement: true,
        }
    }
}

impl TraceOptions {
    pub fn with_grid(grid_n: usize) -> Self {
        TraceOptions {
            grid_n,
            ..Default::default()
        }
    }
}

/// Projects `z0` onto `|r| = c` by Newton steps on `log r`.
pub fn newton_correct(r: &RationalMap, c: f64, z0: Complex64) -> Result<Complex64, TraceError> {
    let target = c.ln();
    let mut z = z0;
    for _ in 0..NEWTON_MAX_ITERS {
        let a = r.abs(z);
        if a == 0.0 || !a.is_finite() {
            return Err(TraceError::Newton(z, "at a zero or pole of r"));
        }
        let f = a.ln() - target;
        if f.abs() <= CORRECTION_TOL {
            return Ok(z);
        }
        let dr = r.derivative(z);
        if dr.norm() < MIN_LOG_DERIVATIVE {
            return Err(TraceError::Newton(z, "derivative vanishes (near a critical point)"));
        }
        let ld = r.log_derivative(z);
        if ld.norm().is_nan() || ld.norm() < MIN_LOG_DERIVATIVE {
            return Err(TraceError::Newton(z, "log-derivative vanishes"));
        }
        z -= f / ld;
    }
    let a = r.abs(z);
    if a.is_finite() && (a.ln() - target).abs() <= 1e3 * CORRECTION_TOL {
        return Ok(z);
    }
    Err(TraceError::Newton(z, "no convergence in 30 iterations"))
}

/// Square tracing box that contains the whole level set.
pub fn tracing_box(r: &RationalMap, c: f64, n: usize) -> Result<GridSpec, TraceError> {
    let at_inf = r.eval_sphere(SpherePoint::Infinity)?.norm();
    if (at_inf / c - 1.0).abs() <= 1e-6 {
        return Err(TraceError::LevelThroughInfinity(c, at_inf));
    }
    let outside_is_high = at_inf > c;
    let (zeros, poles) = r.zeros_poles();
    let crit = r.critical_points()?;
    let mut extent: f64 = 0.0;
    for (p, _) in zeros.iter().chain(poles.iter()).chain(crit.iter()) {
        if let SpherePoint::Finite(z) = p {
            extent = extent.max(z.norm());
        }
    }
    let margin = 1.05_f64;
    let mut radius = extent * 1.01 + 0.05;
    for _ in 0..200 {
        let samples = 2048;
        let ok = (0..samples).all(|k| {
            let z = Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / samples as f64);
            let a = r.abs(z);
            if outside_is_high {
                a > c * margin
            } else {
                a < c / margin
            }
        });
        if ok {
            let half = radius * 1.08;
            return Ok(GridSpec::square(Complex64::new(0.0, 0.0), half, n));
        }
        radius *= 1.1;
        if radius > 1e8 {
            break;
        }
    }
    Err(TraceError::LevelThroughInfinity(c, at_inf))
}

struct Field {
    grid: GridSpec,
    log_c: f64,
    values: Vec<f64>,
}

impl Field {
    fn sample(r: &RationalMap, c: f64, grid: GridSpec) -> Field {
        let n = grid.n;
        let lc = c.ln();
        let values: Vec<f64> = (0..=n)
            .into_par_iter()
            .flat_map_iter(|j| {
                (0..=n).map(move |i| {
                    let a = r.abs(grid.node(i, j));
                    let v = a.ln() - lc;
                    if v.is_nan() {
                        0.0
                    } else {
                        v
                    }
                })
            })
            .collect();
        Field { grid, log_c: lc, values }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.grid.n + 1) + i]
    }

    fn high(&self, i: usize, j: usize) -> bool {
        self.at(i, j) >= 0.0
    }
}

/// Raw marching-squares loops (unordered orientation), before correction.
fn marching_loops(r: &RationalMap, field: &Field) -> Result<Vec<Vec<Complex64>>, TraceError> {
    let n = field.grid.n;
    let g = field.grid;
    // crossing ids: horizontal link (i,j)-(i+1,j) -> j*n + i; vertical (i,j)-(i,j+1) -> H + i*n + j
    let hcount = (n + 1) * n;
    let hid = |i: usize, j: usize| j * n + i;
    let vid = |i: usize, j: usize| hcount + i * n + j;
    let total = 2 * hcount;
    let mut links: Vec<[u32; 2]> = vec![[u32::MAX; 2]; total];
    let mut point: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); total];

    let interp = |a: Complex64, b: Complex64, fa: f64, fb: f64| {
        let fa = fa.clamp(-60.0, 60.0);
        let fb = fb.clamp(-60.0, 60.0);
        let t = if fa == fb { 0.5 } else { (fa / (fa - fb)).clamp(0.0, 1.0) };
        a + (b - a) * t
    };
    let connect = |links: &mut Vec<[u32; 2]>, a: usize, b: usize| -> Result<(), TraceError> {
        for (x, y) in [(a, b), (b, a)] {
            let slot = &mut links[x];
            if slot[0] == u32::MAX {
                slot[0] = y as u32;
            } else if slot[1] == u32::MAX {
                slot[1] = y as u32;
            } else {
                return Err(TraceError::CoarseGrid {
                    n,
                    coarse: "crossing with three neighbours".into(),
                    fine: String::new(),
                });
            }
        }
        Ok(())
    };

    for j in 0..n {
        for i in 0..n {
            let s = [
                field.high(i, j),
                field.high(i + 1, j),
                field.high(i + 1, j + 1),
                field.high(i, j + 1),
            ];
            if s.iter().all(|&x| x == s[0]) {
                continue;
            }
            // bottom, right, top, left
            let ids = [hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)];
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut crossing = [false; 4];
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                if s[a] != s[b] {
                    crossing[e] = true;
                    let (ia, ja) = corners[a];
                    let (ib, jb) = corners[b];
                    point[ids[e]] = interp(g.node(ia, ja), g.node(ib, jb), field.at(ia, ja), field.at(ib, jb));
                }
            }
            let active: Vec<usize> = (0..4).filter(|&e| crossing[e]).collect();
            if active.len() == 2 {
                connect(&mut links, ids[active[0]], ids[active[1]])?;
            } else {
                // saddle: decide with the cell centre
                let centre = (g.node(i, j) + g.node(i + 1, j + 1)) * 0.5;
                let fc = r.abs(centre).ln() - field.log_c;
                let centre_high = fc >= 0.0;
                if centre_high == s[0] {
                    // corner 0 and 2 joined through the centre: isolate corners 1 and 3
                    connect(&mut links, ids[0], ids[1])?;
                    connect(&mut links, ids[2], ids[3])?;
                } else {
                    connect(&mut links, ids[3], ids[0])?;
                    connect(&mut links, ids[1], ids[2])?;
                }
            }
        }
    }

    let mut seen = vec![false; total];
    let mut loops = Vec::new();
    for start in 0..total {
        if seen[start] || links[start][0] == u32::MAX {
            continue;
        }
        if links[start][1] == u32::MAX {
            return Err(TraceError::Unbounded);
        }
        let mut chain = vec![point[start]];
        seen[start] = true;
        let mut prev = start;
        let mut cur = links[start][0] as usize;
        while cur != start {
            if seen[cur] || links[cur][1] == u32::MAX {
                return Err(TraceError::Unbounded);
            }
            seen[cur] = true;
            chain.push(point[cur]);
            let [a, b] = links[cur];
            let next = if a as usize == prev { b } else { a } as usize;
            prev = cur;
            cur = next;
        }
        loops.push(chain);
    }
    Ok(loops)
}

struct VertexSite {
    point: Complex64,
    multiplicity: usize,
}

fn vertex_sites(r: &RationalMap, c: f64) -> Result<Vec<VertexSite>, TraceError> {
    let mut out = Vec::new();
    for &(p, d) in r.critical_points()?.iter() {
        if let SpherePoint::Finite(z) = p {
            let a = r.abs(z);
            if (a - c).abs() <= VERTEX_LEVEL_TOL * c {
                out.push(VertexSite { point: z, multiplicity: d });
            }
        }
    }
    Ok(out)
}

/// An arc of a raw loop lying outside every snap disc, with the vertex discs it leaves and enters.
struct RawArc {
    points: Vec<Complex64>,
    from: Option<usize>,
    to: Option<usize>,
}

fn cut_at_vertices(loops: Vec<Vec<Complex64>>, sites: &[VertexSite], snap: f64) -> Vec<RawArc> {
    let inside = |z: Complex64| sites.iter().position(|s| (z - s.point).norm() < snap);
    let mut arcs = Vec::new();
    for lp in loops {
        let tags: Vec<Option<usize>> = lp.iter().map(|&z| inside(z)).collect();
        let m = lp.len();
        let Some(first_in) = tags.iter().position(|t| t.is_some()) else {
            arcs.push(RawArc {
                points: lp,
                from: None,
                to: None,
            });
            continue;
        };
        // rotate so that the loop starts inside a disc
        let mut k = 0;
        while k < m {
            let idx = (first_in + k) % m;
            if tags[idx].is_some() {
                k += 1;
                continue;
            }
            let from = tags[(idx + m - 1) % m];
            let mut pts = Vec::new();
            while k < m && tags[(first_in + k) % m].is_none() {
                pts.push(lp[(first_in + k) % m]);
                k += 1;
            }
            let to = tags[(first_in + k) % m];
            arcs.push(RawArc { points: pts, from, to });
        }
    }
    arcs
}

fn topology_key(arcs: &[RawArc], nsites: usize) -> String {
    let mut deg = vec![0usize; nsites];
    let mut closed = 0;
    let mut open = 0;
    for a in arcs {
        match (a.from, a.to) {
            (Some(x), Some(y)) => {
                deg[x] += 1;
                deg[y] += 1;
                open += 1;
            }
            _ => closed += 1,
        }
    }
    format!("V={nsites} deg={deg:?} closed={closed} open={open}")
}

/// Traces `|r(z)| = c`.
pub fn trace(r: &RationalMap, c: f64, opts: TraceOptions) -> Result<TraceResult, TraceError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(TraceError::BadLevel(c));
    }
    if r.degree() == 0 {
        return Err(TraceError::Constant);
    }
    let grid = tracing_box(r, c, opts.grid_n)?;
    let sites = vertex_sites(r, c)?;

    let field = Field::sample(r, c, grid);
    let loops = marching_loops(r, &field)?;
    let snap = opts.snap_factor * grid.cell_diagonal();
    let arcs = cut_at_vertices(loops, &sites, snap);

    if opts.check_refinement {
        let fine_grid = grid.refined();
        let fine = Field::sample(r, c, fine_grid);
        let fine_loops = marching_loops(r, &fine)?;
        // same physical snap radius so the two cuts are comparable
        let fine_arcs = cut_at_vertices(fine_loops, &sites, snap);
        let a = topology_key(&arcs, sites.len());
        let b = topology_key(&fine_arcs, sites.len());
        if a != b {
            return Err(TraceError::CoarseGrid {
                n: grid.n,
                coarse: a,
                fine: b,
            });
        }
    }

    let mut degree = vec![0usize; sites.len()];
    let mut edges = Vec::new();
    for arc in arcs {
        let mut pts: Vec<Complex64> = Vec::with_capacity(arc.points.len() + 16);
        for &z in &arc.points {
            pts.push(newton_correct(r, c, z)?);
        }
        match (arc.from, arc.to) {
            (Some(a), Some(b)) => {
                degree[a] += 1;
                degree[b] += 1;
                let head = ray_fill(r, c, sites[a].point, pts[0]);
                let tail = ray_fill(r, c, sites[b].point, *pts.last().unwrap());
                let mut full = vec![sites[a].point];
                full.extend(head);
                full.extend(pts);
                full.extend(tail.into_iter().rev());
                full.push(sites[b].point);
                let curve = PolylineCurve::new_dedup(full, false)?;
                edges.push(TraceEdge {
                    curve,
                    ends: Some((a, b)),
                });
            }
            _ => {
                if pts.len() < 3 {
                    continue;
                }
                edges.push(TraceEdge {
                    curve: PolylineCurve::new_dedup(pts, true)?,
                    ends: None,
                });
            }
        }
    }
    for e in &mut edges {
        orient_sublevel_left(r, e);
    }
    let vertices = sites
        .iter()
        .zip(degree)
        .map(|(s, d)| TraceVertex {
            point: SpherePoint::Finite(s.point),
            degree: d,
            expected_degree: 2 * (s.multiplicity + 1),
        })
        .collect();
    Ok(TraceResult {
        level: c,
        edges,
        vertices,
        grid,
    })
}

/// Corrected samples on the segment from a vertex out to the first traced
/// point beyond the snap disc, ordered from the vertex outwards. Points where
/// Newton is unreliable are skipped.
fn ray_fill(r: &RationalMap, c: f64, vertex: Complex64, outer: Complex64) -> Vec<Complex64> {
    let span = (outer - vertex).norm();
    let mut out = Vec::new();
    for k in (1..=12).rev() {
        let t = 0.5_f64.powi(k);
        let guess = vertex + (outer - vertex) * t;
        if let Ok(z) = newton_correct(r, c, guess) {
            let dist = (z - vertex).norm();
            if (z - guess).norm() <= 0.25 * t * span && dist > 1e-9 && dist < span
                && out.last().is_none_or(|&p: &Complex64| (p - vertex).norm() < dist) {
                    out.push(z);
                }
        }
    }
    out
}

/// Orients an edge so that `|r| < c` lies to its left (majority vote over segments).
fn orient_sublevel_left(r: &RationalMap, e: &mut TraceEdge) {
    let mut vote = 0i64;
    for (a, b) in e.curve.segments() {
        let m = (a + b) * 0.5;
        let ld = r.log_derivative(m);
        if !ld.norm().is_finite() || ld.norm() == 0.0 {
            continue;
        }
        // gradient of log|r| is conj(r'/r); the left normal is i * (b - a)
        let grad = ld.conj();
        let left = Complex64::new(0.0, 1.0) * (b - a);
        let dot = grad.re * left.re + grad.im * left.im;
        vote += if dot > 0.0 { -1 } else { 1 };
    }
    if vote < 0 {
        e.curve = e.curve.reversed();
        if let Some((a, b)) = e.ends {
            e.ends = Some((b, a));
        }
    }
}
