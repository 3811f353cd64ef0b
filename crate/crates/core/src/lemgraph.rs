//! Lemniscate graphs: faces, 2-colouring and point-to-face assignment.
//!
//! Faces are found by flood-filling the nodes of a square grid, where two
//! neighbouring nodes are connected unless the grid link between them
//! crosses an edge polyline. The same grid then answers point-location
//! queries, so traced and hand-built graphs go through one code path.

use std::collections::{HashMap, HashSet, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{segments_intersect, PolylineCurve, SegmentIndex};
use crate::ratfun::{Multiset, RationalMap, SpherePoint};
use crate::tracer::{GridSpec, TraceResult};

/// Points closer than this to an edge cannot be assigned to a face.
pub const ON_EDGE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("not a lemniscate graph: {0}")]
    NotLemniscateGraph(GraphReport),
    #[error("faces are not 2-colorable: faces {0} and {1} share edge {2} and the same colour")]
    NotTwoColorable(usize, usize, usize),
    #[error("point {0} lies on edge {1} (distance {2:.3e})")]
    OnEdge(SpherePoint, usize, f64),
    #[error("edge {0} touches the border of the face grid; enlarge the grid box")]
    GridTooSmall(usize),
    #[error("cannot place {0} in a face at this grid resolution; refine the grid")]
    Unlocatable(Complex64),
    #[error("edge {0} has inconsistent faces along its length; refine the grid")]
    InconsistentSides(usize),
    #[error("vertex index {0} out of range")]
    BadVertex(usize),
    #[error("graph manifest does not match its edge files: {0}")]
    Manifest(String),
    #[error("invalid map in graph manifest: {0}")]
    Map(#[from] crate::ratfun::RatError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Grey,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::White => Color::Grey,
            Color::Grey => Color::White,
        }
    }
}

/// One clause of the lemniscate-graph definition that failed, with its witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Violation {
    OddDegree { vertex: usize, degree: usize },
    DegreeBelowFour { vertex: usize, degree: usize },
    /// Measured degree differs from `2(d+1)` for the critical point; can come
    /// from nearly coincident critical points.
    DegreeMismatch { vertex: usize, measured: usize, expected: usize },
    SameFaceBothSides { edge: usize, face: usize },
    AdjacentSameColor { edge: usize, face: usize, other: usize },
    Euler { lhs: i64, rhs: i64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GraphReport {
    pub violations: Vec<Violation>,
    pub euler: EulerAudit,
}

impl std::fmt::Display for GraphReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| format!("{v:?}")).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// `V + (closed edges) - E + F = 1 + C`, closed edges carrying one auxiliary vertex each.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EulerAudit {
    pub vertices: usize,
    pub closed_edges: usize,
    pub edges: usize,
    pub faces: usize,
    pub components: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphVertex {
    pub point: Complex64,
    pub degree: usize,
    pub expected_degree: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub curve: PolylineCurve,
    pub ends: Option<(usize, usize)>,
    pub left: usize,
    pub right: usize,
}

/// An edge as seen from a face: `forward` when the face lies to the edge's left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub id: usize,
    /// Connected components of the face boundary.
    pub boundary: Vec<Vec<DirectedEdge>>,
    pub representative: Complex64,
    pub unbounded: bool,
    pub color: Option<Color>,
    pub points: Multiset,
}

impl Face {
    pub fn boundary_edges(&self) -> impl Iterator<Item = DirectedEdge> + '_ {
        self.boundary.iter().flatten().copied()
    }

    /// Euler characteristic of the face as a planar domain.
    pub fn euler_characteristic(&self) -> i64 {
        2 - self.boundary.len() as i64
    }
}

struct FaceLocator {
    grid: GridSpec,
    labels: Vec<u32>,
    cells: HashMap<(usize, usize), Vec<(Complex64, Complex64)>>,
    index: SegmentIndex,
    outer_label: u32,
    valid: HashSet<u32>,
}

impl FaceLocator {
    fn cell_of(&self, z: Complex64) -> (usize, usize) {
        let (dx, dy) = self.grid.cell();
        let i = (((z.re - self.grid.lo[0]) / dx).floor().max(0.0) as usize).min(self.grid.n - 1);
        let j = (((z.im - self.grid.lo[1]) / dy).floor().max(0.0) as usize).min(self.grid.n - 1);
        (i, j)
    }

    fn label(&self, i: usize, j: usize) -> u32 {
        self.labels[j * (self.grid.n + 1) + i]
    }

    /// Component label of the grid node visible from `z` inside its cell.
    fn locate(&self, z: Complex64) -> Option<u32> {
        if !self.grid.contains(z) {
            return Some(self.outer_label);
        }
        let (i, j) = self.cell_of(z);
        let empty = Vec::new();
        let segs = self.cells.get(&(i, j)).unwrap_or(&empty);
        let mut corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        corners.sort_by(|a, b| {
            let da = (self.grid.node(a.0, a.1) - z).norm();
            let db = (self.grid.node(b.0, b.1) - z).norm();
            da.partial_cmp(&db).unwrap()
        });
        corners.into_iter().find_map(|(ci, cj)| {
            let node = self.grid.node(ci, cj);
            let blocked = segs.iter().any(|&(a, b)| segments_intersect(z, node, a, b));
            let l = self.label(ci, cj);
            (!blocked && self.valid.contains(&l)).then_some(l)
        })
    }
}

pub struct LemGraph {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdge>,
    pub faces: Vec<Face>,
    map: Option<(RationalMap, f64)>,
    locator: FaceLocator,
}

impl std::fmt::Debug for LemGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LemGraph")
            .field("vertices", &self.vertices)
            .field("edges", &self.edges.len())
            .field("faces", &self.faces)
            .finish()
    }
}

/// Grid covering the bounding box of the curves with a relative margin.
pub fn auto_grid(curves: &[&PolylineCurve], n: usize) -> GridSpec {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in curves {
        let (a, b) = c.bbox();
        lo.re = lo.re.min(a.re);
        lo.im = lo.im.min(a.im);
        hi.re = hi.re.max(b.re);
        hi.im = hi.im.max(b.im);
    }
    let centre = (lo + hi) * 0.5;
    let half = 0.5 * (hi.re - lo.re).max(hi.im - lo.im) * 1.15 + 1e-9;
    GridSpec::square(centre, half, n)
}

impl LemGraph {
    /// Computes faces and edge sides for an embedded graph; no validation.
    pub fn from_parts(
        vertices: Vec<Complex64>,
        edges: Vec<(PolylineCurve, Option<(usize, usize)>)>,
        grid: GridSpec,
    ) -> Result<LemGraph, GraphError> {
        let mut degree = vec![0usize; vertices.len()];
        for (_, ends) in &edges {
            if let Some((a, b)) = *ends {
                for v in [a, b] {
                    *degree.get_mut(v).ok_or(GraphError::BadVertex(v))? += 1;
                }
            }
        }
        let n = grid.n;
        let nodes = (n + 1) * (n + 1);
        let mut hblock = vec![false; n * (n + 1)]; // (i,j)-(i+1,j) at j*n+i
        let mut vblock = vec![false; (n + 1) * n]; // (i,j)-(i,j+1) at i*n+j
        let mut cells: HashMap<(usize, usize), Vec<(Complex64, Complex64)>> = HashMap::new();
        let (dx, dy) = grid.cell();
        for (ei, (curve, _)) in edges.iter().enumerate() {
            for (a, b) in curve.segments() {
                let fi = |x: f64| ((x - grid.lo[0]) / dx).floor();
                let fj = |y: f64| ((y - grid.lo[1]) / dy).floor();
                let i0 = fi(a.re.min(b.re));
                let i1 = fi(a.re.max(b.re));
                let j0 = fj(a.im.min(b.im));
                let j1 = fj(a.im.max(b.im));
                if i0 < 0.0 || j0 < 0.0 || i1 >= n as f64 || j1 >= n as f64 {
                    return Err(GraphError::GridTooSmall(ei));
                }
                for i in i0 as usize..=i1 as usize {
                    for j in j0 as usize..=j1 as usize {
                        cells.entry((i, j)).or_default().push((a, b));
                        let (p00, p10, p11, p01) =
                            (grid.node(i, j), grid.node(i + 1, j), grid.node(i + 1, j + 1), grid.node(i, j + 1));
                        if segments_intersect(p00, p10, a, b) {
                            hblock[j * n + i] = true;
                        }
                        if segments_intersect(p01, p11, a, b) {
                            hblock[(j + 1) * n + i] = true;
                        }
                        if segments_intersect(p00, p01, a, b) {
                            vblock[i * n + j] = true;
                        }
                        if segments_intersect(p10, p11, a, b) {
                            vblock[(i + 1) * n + j] = true;
                        }
                    }
                }
            }
        }

        // flood fill
        let mut labels = vec![u32::MAX; nodes];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..nodes {
            if labels[start] != u32::MAX {
                continue;
            }
            labels[start] = next;
            queue.push_back(start);
            while let Some(k) = queue.pop_front() {
                let (i, j) = (k % (n + 1), k / (n + 1));
                let mut visit = |ni: usize, nj: usize, blocked: bool| {
                    let nk = nj * (n + 1) + ni;
                    if !blocked && labels[nk] == u32::MAX {
                        labels[nk] = next;
                        queue.push_back(nk);
                    }
                };
                if i < n {
                    visit(i + 1, j, hblock[j * n + i]);
                }
                if i >= 1 {
                    visit(i - 1, j, hblock[j * n + i - 1]);
                }
                if j < n {
                    visit(i, j + 1, vblock[i * n + j]);
                }
                if j >= 1 {
                    visit(i, j - 1, vblock[i * n + j - 1]);
                }
            }
            next += 1;
        }
        let outer_label = labels[0];

        let curve_refs: Vec<&PolylineCurve> = edges.iter().map(|(c, _)| c).collect();
        let mut locator = FaceLocator {
            grid,
            labels,
            cells,
            index: SegmentIndex::new(&curve_refs),
            outer_label,
            valid: (0..next).collect(),
        };

        // sides of every edge, sampled at three places along it
        let probe = 0.1 * grid.cell_diagonal();
        let mut sides = Vec::with_capacity(edges.len());
        for (ei, (curve, _)) in edges.iter().enumerate() {
            let mut found: Option<(u32, u32)> = None;
            for frac in [0.5, 0.25, 0.75] {
                let s = curve.length() * frac;
                let z = curve.point_at(s);
                let ahead = curve.point_at((s + 1e-3 * curve.length()).min(curve.length()));
                let behind = curve.point_at((s - 1e-3 * curve.length()).max(0.0));
                let t = ahead - behind;
                let normal = Complex64::new(0.0, 1.0) * t / t.norm();
                let l = locator.locate(z + normal * probe);
                let r = locator.locate(z - normal * probe);
                let (Some(l), Some(r)) = (l, r) else {
                    return Err(GraphError::Unlocatable(z));
                };
                match found {
                    None => found = Some((l, r)),
                    Some(prev) if prev != (l, r) => return Err(GraphError::InconsistentSides(ei)),
                    _ => {}
                }
            }
            sides.push(found.unwrap());
        }

        // faces: one per flood-fill component, numbered by first appearance
        let mut face_of_label: HashMap<u32, usize> = HashMap::new();
        let mut face_labels: Vec<u32> = Vec::new();
        let mut intern = |l: u32, face_labels: &mut Vec<u32>| {
            *face_of_label.entry(l).or_insert_with(|| {
                face_labels.push(l);
                face_labels.len() - 1
            })
        };
        intern(outer_label, &mut face_labels);
        let mut graph_edges = Vec::with_capacity(edges.len());
        for ((curve, ends), (l, r)) in edges.into_iter().zip(sides) {
            let left = intern(l, &mut face_labels);
            let right = intern(r, &mut face_labels);
            graph_edges.push(GraphEdge {
                curve,
                ends,
                left,
                right,
            });
        }
        // grid components not adjacent to any edge are slivers around nodes lying exactly on a curve
        locator.valid = face_labels.iter().copied().collect();

        let reps = representatives(&locator, &face_labels);
        let mut faces: Vec<Face> = face_labels
            .iter()
            .enumerate()
            .map(|(id, &l)| Face {
                id,
                boundary: Vec::new(),
                representative: reps[id],
                unbounded: l == outer_label,
                color: None,
                points: Multiset::new(),
            })
            .collect();
        for f in faces.iter_mut() {
            let incident: Vec<DirectedEdge> = graph_edges
                .iter()
                .enumerate()
                .flat_map(|(ei, e)| {
                    let mut v = Vec::new();
                    if e.left == f.id {
                        v.push(DirectedEdge { edge: ei, forward: true });
                    }
                    if e.right == f.id {
                        v.push(DirectedEdge { edge: ei, forward: false });
                    }
                    v
                })
                .collect();
            f.boundary = group_by_vertices(&incident, &graph_edges);
        }

        Ok(LemGraph {
            vertices: vertices
                .into_iter()
                .zip(degree)
                .map(|(point, degree)| GraphVertex {
                    point,
                    degree,
                    expected_degree: None,
                })
                .collect(),
            edges: graph_edges,
            faces,
            map: None,
            locator,
        })
    }

    /// Builds, validates and colours the graph of a traced lemniscate.
    pub fn build(trace: &TraceResult, r: &RationalMap) -> Result<LemGraph, GraphError> {
        let vertices = trace
            .vertices
            .iter()
            .map(|v| v.point.as_finite().expect("traced vertices are finite"))
            .collect();
        let edges = trace.edges.iter().map(|e| (e.curve.clone(), e.ends)).collect();
        let mut g = LemGraph::from_parts(vertices, edges, trace.grid)?;
        for (v, tv) in g.vertices.iter_mut().zip(&trace.vertices) {
            v.expected_degree = Some(tv.expected_degree);
        }
        g.map = Some((r.clone(), trace.level));
        let report = g.validate();
        if !report.violations.is_empty() {
            return Err(GraphError::NotLemniscateGraph(report));
        }
        g.color()
    }

    /// Validates an untraced graph and colours it by face bipartition.
    pub fn build_synthetic(
        vertices: Vec<Complex64>,
        edges: Vec<(PolylineCurve, Option<(usize, usize)>)>,
        grid: GridSpec,
    ) -> Result<LemGraph, GraphError> {
        let g = LemGraph::from_parts(vertices, edges, grid)?;
        let report = g.validate();
        if !report.violations.is_empty() {
            return Err(GraphError::NotLemniscateGraph(report));
        }
        g.color()
    }

    pub fn attach_map(&mut self, r: RationalMap, c: f64) {
        self.map = Some((r, c));
    }

    pub fn map(&self) -> Option<(&RationalMap, f64)> {
        self.map.as_ref().map(|(r, c)| (r, *c))
    }

    pub fn grid(&self) -> GridSpec {
        self.locator.grid
    }

    pub fn euler_audit(&self) -> EulerAudit {
        let nv = self.vertices.len();
        let closed = self.edges.iter().filter(|e| e.ends.is_none()).count();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for e in &self.edges {
            if let Some((a, b)) = e.ends {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        let vertex_components = (0..nv).filter(|&i| find(&mut parent, i) == i).count();
        let components = vertex_components + closed;
        let lhs = (nv + closed) as i64 - self.edges.len() as i64 + self.faces.len() as i64;
        EulerAudit {
            vertices: nv,
            closed_edges: closed,
            edges: self.edges.len(),
            faces: self.faces.len(),
            components,
            holds: lhs == 1 + components as i64,
        }
    }

    /// Checks every clause of the lemniscate-graph definition.
    pub fn validate(&self) -> GraphReport {
        let mut violations = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.degree % 2 == 1 {
                violations.push(Violation::OddDegree { vertex: i, degree: v.degree });
            } else if v.degree < 4 {
                violations.push(Violation::DegreeBelowFour { vertex: i, degree: v.degree });
            }
            if let Some(exp) = v.expected_degree {
                if exp != v.degree {
                    violations.push(Violation::DegreeMismatch {
                        vertex: i,
                        measured: v.degree,
                        expected: exp,
                    });
                }
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.left == e.right {
                violations.push(Violation::SameFaceBothSides { edge: i, face: e.left });
            }
        }
        let euler = self.euler_audit();
        if !euler.holds {
            let lhs = (euler.vertices + euler.closed_edges) as i64 - euler.edges as i64 + euler.faces as i64;
            violations.push(Violation::Euler {
                lhs,
                rhs: 1 + euler.components as i64,
            });
        }
        GraphReport { violations, euler }
    }

    /// Proper 2-colouring: by `|r| < c` when a map is attached (sublevel
    /// faces white), otherwise by bipartition of the face adjacency graph
    /// with the unbounded face grey.
    pub fn color(mut self) -> Result<LemGraph, GraphError> {
        let colors: Vec<Color> = if let Some((r, c)) = &self.map {
            self.faces
                .iter()
                .map(|f| {
                    let low = if f.unbounded {
                        match r.eval_sphere(SpherePoint::Infinity) {
                            Ok(v) => v.norm() < *c,
                            Err(_) => r.abs(f.representative) < *c,
                        }
                    } else {
                        r.abs(f.representative) < *c
                    };
                    if low {
                        Color::White
                    } else {
                        Color::Grey
                    }
                })
                .collect()
        } else {
            let mut colors: Vec<Option<Color>> = vec![None; self.faces.len()];
            let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.faces.len()];
            for (ei, e) in self.edges.iter().enumerate() {
                adj[e.left].push((e.right, ei));
                adj[e.right].push((e.left, ei));
            }
            for start in 0..self.faces.len() {
                if colors[start].is_some() {
                    continue;
                }
                let seed = if self.faces[start].unbounded { Color::Grey } else { Color::White };
                colors[start] = Some(seed);
                let mut queue = VecDeque::from([start]);
                while let Some(f) = queue.pop_front() {
                    let cf = colors[f].unwrap();
                    for &(g, ei) in &adj[f] {
                        match colors[g] {
                            None => {
                                colors[g] = Some(cf.other());
                                queue.push_back(g);
                            }
                            Some(cg) if cg == cf => return Err(GraphError::NotTwoColorable(f, g, ei)),
                            _ => {}
                        }
                    }
                }
            }
            colors.into_iter().map(Option::unwrap).collect()
        };
        for (ei, e) in self.edges.iter().enumerate() {
            if colors[e.left] == colors[e.right] {
                return Err(GraphError::NotTwoColorable(e.left, e.right, ei));
            }
        }
        for (f, c) in self.faces.iter_mut().zip(colors) {
            f.color = Some(c);
        }
        Ok(self)
    }

    /// Face containing a point of the sphere.
    pub fn locate(&self, p: SpherePoint) -> Result<usize, GraphError> {
        let z = match p {
            SpherePoint::Infinity => return Ok(self.outer_face()),
            SpherePoint::Finite(z) => z,
        };
        if let Some(hit) = self.locator.index.nearest(z) {
            if hit.distance <= ON_EDGE_TOL {
                return Err(GraphError::OnEdge(p, hit.curve, hit.distance));
            }
        }
        let label = self.locator.locate(z).ok_or(GraphError::Unlocatable(z))?;
        self.faces
            .iter()
            .position(|f| f.representative_label(&self.locator) == label)
            .ok_or(GraphError::Unlocatable(z))
    }

    pub fn outer_face(&self) -> usize {
        self.faces.iter().position(|f| f.unbounded).unwrap_or(0)
    }

    /// Distributes the points over the faces (replacing earlier assignments).
    pub fn assign_points(mut self, pts: &Multiset) -> Result<LemGraph, GraphError> {
        for f in &mut self.faces {
            f.points = Multiset::new();
        }
        for &(p, k) in pts.iter() {
            let f = self.locate(p)?;
            self.faces[f].points.push(p, k);
        }
        Ok(self)
    }

    /// Pairs `(E, F, edge)` of distinct faces sharing an edge, `E` on the left.
    pub fn shared_edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges.iter().enumerate().map(|(i, e)| (e.left, e.right, i))
    }

    /// Closed polylines bounding a face, one per boundary component, used
    /// for containment tests. Open edges of a component are concatenated.
    pub fn face_boundary_curves(&self, face: usize) -> Vec<Vec<&PolylineCurve>> {
        self.faces[face]
            .boundary
            .iter()
            .map(|comp| comp.iter().map(|d| &self.edges[d.edge].curve).collect())
            .collect()
    }
}

impl Face {
    fn representative_label(&self, loc: &FaceLocator) -> u32 {
        loc.locate(self.representative).unwrap_or(u32::MAX)
    }
}

/// A grid node of each face, chosen far from the edges.
fn representatives(loc: &FaceLocator, face_labels: &[u32]) -> Vec<Complex64> {
    let n = loc.grid.n;
    let stride = (n / 128).max(1);
    let mut best: Vec<(f64, Complex64)> = vec![(-1.0, Complex64::new(0.0, 0.0)); face_labels.len()];
    let pos: HashMap<u32, usize> = face_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let consider = |i: usize, j: usize, best: &mut Vec<(f64, Complex64)>| {
        let l = loc.label(i, j);
        let Some(&f) = pos.get(&l) else { return };
        let z = loc.grid.node(i, j);
        let d = loc.index.nearest(z).map_or(f64::INFINITY, |h| h.distance);
        if d > best[f].0 {
            best[f] = (d, z);
        }
    };
    for j in (0..=n).step_by(stride) {
        for i in (0..=n).step_by(stride) {
            consider(i, j, &mut best);
        }
    }
    // faces too small for the strided scan
    if best.iter().any(|b| b.0 < 0.0) {
        for j in 0..=n {
            for i in 0..=n {
                let l = loc.label(i, j);
                if let Some(&f) = pos.get(&l) {
                    if best[f].0 < 0.0 {
                        consider(i, j, &mut best);
                    }
                }
            }
        }
    }
    best.into_iter().map(|(_, z)| z).collect()
}

fn group_by_vertices(incident: &[DirectedEdge], edges: &[GraphEdge]) -> Vec<Vec<DirectedEdge>> {
    let m = incident.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for a in 0..m {
        for b in (a + 1)..m {
            let (ea, eb) = (&edges[incident[a].edge], &edges[incident[b].edge]);
            let share = match (ea.ends, eb.ends) {
                (Some((x, y)), Some((u, v))) => x == u || x == v || y == u || y == v,
                _ => incident[a].edge == incident[b].edge,
            };
            if share {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<DirectedEdge>)> = Vec::new();
    for (i, &d) in incident.iter().enumerate().take(m) {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(d),
            None => groups.push((r, vec![d])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Serializable description of a graph; edges refer to CSV files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphManifest {
    pub vertices: Vec<ManifestVertex>,
    pub edges: Vec<ManifestEdge>,
    pub faces: Vec<ManifestFace>,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<crate::ratfun::MapJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifestVertex {
    pub point: [f64; 2],
    pub degree: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifestEdge {
    pub file: String,
    pub closed: bool,
    pub ends: Option<(usize, usize)>,
    pub left_face: usize,
    pub right_face: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifestFace {
    pub id: usize,
    pub color: Option<Color>,
    pub unbounded: bool,
    pub representative: [f64; 2],
    pub boundary: Vec<Vec<DirectedEdge>>,
    pub points: Multiset,
}

impl LemGraph {
    /// Manifest with edge `i` stored in `edge_file(i)`.
    pub fn manifest(&self, edge_file: impl Fn(usize) -> String) -> GraphManifest {
        GraphManifest {
            vertices: self
                .vertices
                .iter()
                .map(|v| ManifestVertex {
                    point: [v.point.re, v.point.im],
                    degree: v.degree,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| ManifestEdge {
                    file: edge_file(i),
                    closed: e.ends.is_none(),
                    ends: e.ends,
                    left_face: e.left,
                    right_face: e.right,
                })
                .collect(),
            faces: self
                .faces
                .iter()
                .map(|f| ManifestFace {
                    id: f.id,
                    color: f.color,
                    unbounded: f.unbounded,
                    representative: [f.representative.re, f.representative.im],
                    boundary: f.boundary.clone(),
                    points: f.points.clone(),
                })
                .collect(),
            grid: self.locator.grid,
            map: self.map.as_ref().map(|(r, _)| r.to_json()),
            level: self.map.as_ref().map(|(_, c)| *c),
        }
    }
}

impl LemGraph {
    /// Rebuilds a graph from its manifest and the edge polylines it refers to.
    pub fn from_manifest(m: &GraphManifest, curves: Vec<PolylineCurve>) -> Result<LemGraph, GraphError> {
        if curves.len() != m.edges.len() {
            return Err(GraphError::Manifest(format!("{} edges listed, {} curves given", m.edges.len(), curves.len())));
        }
        let vertices = m.vertices.iter().map(|v| Complex64::new(v.point[0], v.point[1])).collect();
        let edges = curves.into_iter().zip(&m.edges).map(|(c, e)| (c, e.ends)).collect();
        let mut g = LemGraph::from_parts(vertices, edges, m.grid)?;
        if let (Some(map), Some(level)) = (&m.map, m.level) {
            g.map = Some((RationalMap::from_json(map)?, level));
        }
        for (i, (e, me)) in g.edges.iter().zip(&m.edges).enumerate() {
            if (e.left, e.right) != (me.left_face, me.right_face) {
                return Err(GraphError::Manifest(format!("faces of edge {i} differ from the manifest")));
            }
        }
        let mut g = g.color()?;
        for mf in &m.faces {
            let f = g
                .faces
                .get_mut(mf.id)
                .ok_or_else(|| GraphError::Manifest(format!("face {} does not exist", mf.id)))?;
            f.points = mf.points.clone();
        }
        Ok(g)
    }
}
