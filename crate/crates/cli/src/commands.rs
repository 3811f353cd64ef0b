use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lemniscate::certify::{self, CertError, CertOptions, JordanVerdict};
use lemniscate::curves::{halfplane_segment_hypothesis, HalfplaneVerdict, PolylineCurve};
use lemniscate::koch::{self, KochError};
use lemniscate::lemgraph::{GraphError, GraphManifest, LemGraph};
use lemniscate::matching::{lemniscate_pair, MatchingError, SideCondition};
use lemniscate::potential::{harmonic_measure_mc, BoundaryPartition, LabeledArc, MeasureEstimate, PotentialError, Region};
use lemniscate::ratfun::{MapJson, Multiset, RationalMap, SpherePoint};
use lemniscate::tracer::{trace, GridSpec, TraceEdge, TraceOptions, TraceResult, TraceVertex};
use lemniscate::welding::{self, WeldingError};
use lemniscate::Complex64;
use serde::{Deserialize, Serialize};

use crate::output::{refusal, usage, Run, Svg};
use crate::{Cli, Command, McArgs, Status};

pub fn run(cli: &Cli) -> Result<Status> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = match &cli.command {
        Command::Trace { .. } => "trace",
        Command::Graph { .. } => "graph",
        Command::Measure { .. } => "measure",
        Command::Weld { .. } => "weld",
        Command::Match { .. } => "match",
        Command::Koch { .. } => "koch",
        Command::Certify { .. } => "certify",
        Command::Jordan { .. } => "jordan",
        Command::Unsolvable { .. } => "unsolvable",
    };
    let mut run = Run::new(&cli.out, name, args)?;
    let (status, main_json) = match &cli.command {
        Command::Trace { map, c, grid } => cmd_trace(&mut run, map, *c, *grid)?,
        Command::Graph { trace } => cmd_graph(&mut run, trace)?,
        Command::Measure { graph, base, partition, mc } => cmd_measure(&mut run, graph, base, partition.as_deref(), *mc)?,
        Command::Weld { curves, base, probe, mc } => cmd_weld(&mut run, curves, base.as_deref(), *probe, *mc)?,
        Command::Match { map, c, grid } => cmd_match(&mut run, map, *c, *grid)?,
        Command::Koch { l, n, snowflake, dim } => cmd_koch(&mut run, *l, *n, *snowflake, *dim)?,
        Command::Certify {
            graph,
            points,
            polynomial,
            levels,
            mc,
        } => cmd_certify(&mut run, graph, points.as_deref(), *polynomial, *levels, *mc)?,
        Command::Jordan { map, c, grid } => cmd_jordan(&mut run, map, *c, *grid)?,
        Command::Unsolvable { curve } => cmd_unsolvable(&mut run, curve)?,
    };
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&main_json)?);
    }
    run.finish()?;
    Ok(status)
}

type Outcome = (Status, serde_json::Value);

fn parse_point(s: &str) -> Result<SpherePoint> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok(SpherePoint::Infinity);
    }
    let parts: Vec<&str> = s.split(',').collect();
    let parsed: Vec<f64> = parts.iter().filter_map(|p| p.trim().parse().ok()).collect();
    match (parts.len(), parsed.as_slice()) {
        (2, &[re, im]) => Ok(SpherePoint::finite(re, im)),
        _ => Err(usage(format!("bad point {s:?}; expected `re,im` or `inf`"))),
    }
}

fn read_map(run: &mut Run, path: &Path) -> Result<RationalMap> {
    let m: MapJson = run.read_json(path)?;
    RationalMap::from_json(&m).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn check_level(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(usage(format!("--c must be positive, got {c}")));
    }
    Ok(())
}

fn grid_opts(grid: usize) -> Result<TraceOptions> {
    if grid < 16 {
        return Err(usage("--grid must be at least 16"));
    }
    Ok(TraceOptions::with_grid(grid))
}

fn check_walkers(mc: McArgs) -> Result<()> {
    if mc.walkers == 0 {
        return Err(usage("--walkers must be positive"));
    }
    Ok(())
}

fn relative(base: &Path, file: &str) -> PathBuf {
    base.parent().unwrap_or(Path::new(".")).join(file)
}

#[derive(Serialize, Deserialize)]
struct TraceVertexJson {
    point: [f64; 2],
    degree: usize,
    expected_degree: usize,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    file: String,
    closed: bool,
    ends: Option<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct TraceJson {
    map: MapJson,
    level: f64,
    grid: GridSpec,
    signature: (usize, usize, usize),
    jordan: bool,
    max_level_residual: f64,
    vertices: Vec<TraceVertexJson>,
    edges: Vec<EdgeJson>,
}

fn cmd_trace(run: &mut Run, map: &Path, c: f64, grid: usize) -> Result<Outcome> {
    check_level(c)?;
    let r = read_map(run, map)?;
    let opts = grid_opts(grid)?;
    let traced = match trace(&r, c, opts) {
        Ok(t) => t,
        Err(e @ lemniscate::tracer::TraceError::LevelThroughInfinity(..)) => return Err(refusal(e.to_string())),
        Err(e) => return Err(e).context("tracing failed"),
    };
    let mut svg = Svg::new();
    let mut edges = Vec::new();
    for (i, e) in traced.edges.iter().enumerate() {
        let file = format!("edge_{i}.csv");
        run.write_curve(&file, &e.curve)?;
        svg.curve(&e.curve, "black");
        edges.push(EdgeJson {
            file,
            closed: e.ends.is_none(),
            ends: e.ends,
        });
    }
    let vertices = traced
        .vertices
        .iter()
        .map(|v| {
            let z = v.point.as_finite().expect("traced vertices are finite");
            svg.dot(z, "red");
            TraceVertexJson {
                point: [z.re, z.im],
                degree: v.degree,
                expected_degree: v.expected_degree,
            }
        })
        .collect();
    let out = TraceJson {
        map: r.to_json(),
        level: c,
        grid: traced.grid,
        signature: traced.signature(),
        jordan: traced.is_jordan(),
        max_level_residual: traced.max_level_residual(&r),
        vertices,
        edges,
    };
    run.write_json("trace.json", &out)?;
    run.write("trace.svg", &svg.render())?;
    Ok((Status::Ok, serde_json::to_value(&out)?))
}

fn cmd_graph(run: &mut Run, trace_path: &Path) -> Result<Outcome> {
    let t: TraceJson = run.read_json(trace_path)?;
    let r = RationalMap::from_json(&t.map).map_err(|e| usage(e.to_string()))?;
    let mut edges = Vec::new();
    for e in &t.edges {
        let curve = run.read_curve(&relative(trace_path, &e.file), e.closed)?;
        edges.push(TraceEdge { curve, ends: e.ends });
    }
    let traced = TraceResult {
        level: t.level,
        edges,
        vertices: t
            .vertices
            .iter()
            .map(|v| TraceVertex {
                point: SpherePoint::finite(v.point[0], v.point[1]),
                degree: v.degree,
                expected_degree: v.expected_degree,
            })
            .collect(),
        grid: t.grid,
    };
    let g = match LemGraph::build(&traced, &r) {
        Ok(g) => g,
        Err(GraphError::NotLemniscateGraph(report)) => {
            run.write_json("graph_report.json", &report)?;
            return Ok((Status::Negative, serde_json::to_value(&report)?));
        }
        Err(e @ GraphError::NotTwoColorable(..)) => {
            let v = serde_json::json!({ "error": e.to_string() });
            run.write_json("graph_report.json", &v)?;
            return Ok((Status::Negative, v));
        }
        Err(e) => return Err(e).context("building the graph"),
    };
    let mut pts = Multiset::new();
    for &(p, m) in r.zeros().iter().chain(r.poles().iter()) {
        pts.push(p, m);
    }
    let g = g.assign_points(&pts).context("locating zeros and poles")?;
    let manifest = g.manifest(|i| format!("edge_{i}.csv"));
    let mut svg = Svg::new();
    for (i, e) in g.edges.iter().enumerate() {
        run.write_curve(&format!("edge_{i}.csv"), &e.curve)?;
        svg.curve(&e.curve, "black");
    }
    for f in &g.faces {
        for &(p, _) in f.points.iter() {
            if let Some(z) = p.as_finite() {
                svg.dot(z, if r.zeros().iter().any(|q| q.0 == p) { "blue" } else { "red" });
            }
        }
    }
    run.write_json("graph.json", &manifest)?;
    run.write("graph.svg", &svg.render())?;
    Ok((Status::Ok, serde_json::to_value(&manifest)?))
}

fn load_graph(run: &mut Run, path: &Path) -> Result<LemGraph> {
    let m: GraphManifest = run.read_json(path)?;
    let mut curves = Vec::new();
    for e in &m.edges {
        curves.push(run.read_curve(&relative(path, &e.file), e.closed)?);
    }
    LemGraph::from_manifest(&m, curves).map_err(|e| usage(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
struct PartitionFile {
    arcs: Vec<ArcJson>,
}

#[derive(Deserialize)]
struct ArcJson {
    label: String,
    edge: usize,
    s0: f64,
    s1: f64,
}

#[derive(Serialize)]
struct MeasureJson {
    face: usize,
    base: SpherePoint,
    walkers: u64,
    seed: u64,
    capped: u64,
    estimates: BTreeMap<String, MeasureEstimate>,
}

fn cmd_measure(run: &mut Run, graph: &Path, base: &str, partition: Option<&Path>, mc: McArgs) -> Result<Outcome> {
    check_walkers(mc)?;
    run.set_seed(mc.seed);
    let g = load_graph(run, graph)?;
    let base = parse_point(base)?;
    let face = g.locate(base).map_err(|e| usage(e.to_string()))?;
    let region = Region::from_face(&g, face).context("building the region")?;
    let curve_of: BTreeMap<usize, usize> = g.faces[face].boundary_edges().enumerate().map(|(k, d)| (d.edge, k)).collect();
    let arcs = match partition {
        Some(p) => {
            let file: PartitionFile = run.read_json(p)?;
            file.arcs
                .into_iter()
                .map(|a| {
                    let curve = *curve_of
                        .get(&a.edge)
                        .ok_or_else(|| usage(format!("edge {} does not bound face {face}", a.edge)))?;
                    Ok(LabeledArc {
                        label: a.label,
                        curve,
                        s0: a.s0,
                        s1: a.s1,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => curve_of
            .iter()
            .map(|(&edge, &curve)| LabeledArc {
                label: format!("edge_{edge}"),
                curve,
                s0: 0.0,
                s1: g.edges[edge].curve.length(),
            })
            .collect(),
    };
    let h = match harmonic_measure_mc(&region, base, &BoundaryPartition::new(arcs), mc.walkers, mc.seed) {
        Ok(h) => h,
        Err(e @ PotentialError::BadPartition { .. }) => return Err(usage(e.to_string())),
        Err(e) => return Err(e).context("walk on spheres"),
    };
    let out = MeasureJson {
        face,
        base,
        walkers: mc.walkers,
        seed: mc.seed,
        capped: h.capped,
        estimates: h.estimates.into_iter().collect(),
    };
    run.write_json("measure.json", &out)?;
    Ok((Status::Ok, serde_json::to_value(&out)?))
}

#[derive(Serialize)]
struct WeldCurveJson {
    input: String,
    file: String,
    vertices: usize,
    pairs: usize,
    monotone: bool,
    seed: u64,
    probe: Option<f64>,
}

#[derive(Serialize)]
struct WeldJson {
    walkers: u64,
    seed: u64,
    probe_quantile: Option<f64>,
    note: &'static str,
    curves: Vec<WeldCurveJson>,
}

fn cmd_weld(run: &mut Run, curves: &[PathBuf], base: Option<&str>, probe: Option<f64>, mc: McArgs) -> Result<Outcome> {
    check_walkers(mc)?;
    run.set_seed(mc.seed);
    if let Some(q) = probe {
        if !(q > 0.0 && q < 1.0) {
            return Err(usage(format!("--probe must lie in (0, 1), got {q}")));
        }
    }
    let base = base.map(parse_point).transpose()?;
    let mut rows = Vec::new();
    for (i, path) in curves.iter().enumerate() {
        let curve = run.read_curve(path, true)?;
        let inner = match base {
            Some(SpherePoint::Finite(z)) => z,
            Some(SpherePoint::Infinity) => return Err(usage("--base must be an interior point")),
            None => curve.points().iter().sum::<Complex64>() / curve.points().len() as f64,
        };
        let seed = mc.seed.wrapping_add(2 * i as u64);
        let w = match welding::weld(&curve, inner, mc.walkers, seed) {
            Ok(w) => w,
            Err(e @ (WeldingError::NotClosed | WeldingError::NotJordan | WeldingError::Clockwise)) => {
                return Err(refusal(format!("{}: {e}", path.display())))
            }
            Err(WeldingError::Potential(e @ PotentialError::BaseOutside(_))) => {
                return Err(usage(format!("{}: {e}", path.display())))
            }
            Err(e) => return Err(e).with_context(|| format!("welding {}", path.display())),
        };
        let file = format!("weld_{i}.csv");
        let mut csv = String::from("vertex,theta_in,theta_out,sigma_in,sigma_out\n");
        for p in &w.pairs {
            csv.push_str(&format!("{},{:?},{:?},{:?},{:?}\n", p.vertex, p.theta_in, p.theta_out, p.sigma_in, p.sigma_out));
        }
        run.write(&file, &csv)?;
        let mut svg = Svg::new();
        svg.path(vec![Complex64::new(0.0, 0.0), Complex64::new(std::f64::consts::TAU, std::f64::consts::TAU)], "#bbbbbb");
        svg.path(w.pairs.iter().map(|p| Complex64::new(p.theta_in, p.theta_out)).collect(), "black");
        run.write(&format!("weld_{i}.svg"), &svg.render())?;
        rows.push(WeldCurveJson {
            input: path.display().to_string(),
            file,
            vertices: curve.points().len(),
            pairs: w.pairs.len(),
            monotone: w.is_monotone(),
            seed,
            probe: probe.map(|q| welding::singularity_probe(&w, q)).transpose()?,
        });
    }
    let out = WeldJson {
        walkers: mc.walkers,
        seed: mc.seed,
        probe_quantile: probe,
        note: "probe values are numerical evidence only, not a proof of singularity",
        curves: rows,
    };
    run.write_json("weld.json", &out)?;
    Ok((Status::Ok, serde_json::to_value(&out)?))
}

#[derive(Serialize)]
struct ConditionJson {
    condition: SideCondition,
    name: &'static str,
    holds: bool,
    witnesses: Vec<SpherePoint>,
}

fn cmd_match(run: &mut Run, map: &Path, c: f64, grid: usize) -> Result<Outcome> {
    check_level(c)?;
    let r = read_map(run, map)?;
    let all = [SideCondition::NoPoleInside, SideCondition::NoZeroOutside, SideCondition::PoleAtInfinity];
    let report = |failures: &[lemniscate::matching::ConditionFailure]| -> Vec<ConditionJson> {
        all.iter()
            .map(|&cond| {
                let f = failures.iter().find(|f| f.condition == cond);
                ConditionJson {
                    condition: cond,
                    name: cond.roman(),
                    holds: f.is_none(),
                    witnesses: f.map(|f| f.witnesses.clone()).unwrap_or_default(),
                }
            })
            .collect()
    };
    match lemniscate_pair(&r, c, grid_opts(grid)?) {
        Ok(pair) => {
            run.write_curve("match_curve.csv", &pair.curve)?;
            let g_inf = pair.g_at_infinity()?;
            let out = serde_json::json!({
                "map": r.to_json(),
                "level": c,
                "conditions": report(&[]),
                "residual": pair.residual(),
                "samples": pair.curve.points().len(),
                "g_at_infinity": [g_inf.re, g_inf.im],
                "curve": "match_curve.csv",
            });
            run.write_json("match.json", &out)?;
            Ok((Status::Ok, out))
        }
        Err(MatchingError::SideConditions(failures)) => {
            let out = serde_json::json!({
                "map": r.to_json(),
                "level": c,
                "conditions": report(&failures),
                "refused": failures.iter().map(|f| f.condition.roman()).collect::<Vec<_>>(),
            });
            run.write_json("match.json", &out)?;
            eprintln!(
                "refused: side conditions fail: {}",
                failures.iter().map(|f| format!("({})", f.condition.roman())).collect::<Vec<_>>().join(", ")
            );
            Ok((Status::Refused, out))
        }
        Err(MatchingError::NotJordan(sig)) => Err(refusal(format!("|r| = {c} is not a single Jordan curve (V, closed, open) = {sig:?}"))),
        Err(MatchingError::Trace(e @ lemniscate::tracer::TraceError::LevelThroughInfinity(..))) => Err(refusal(e.to_string())),
        Err(e) => Err(e).context("matching pair"),
    }
}

fn koch_error(e: KochError) -> anyhow::Error {
    match e {
        KochError::BadParameter(_) | KochError::BadDimension(_) | KochError::TooDeep { .. } => usage(e.to_string()),
        e => anyhow::Error::new(e),
    }
}

fn cmd_koch(run: &mut Run, l: Option<f64>, n: u32, snowflake: bool, dim: Option<f64>) -> Result<Outcome> {
    if let Some(s) = dim {
        let l = koch::l_for_dimension(s).map_err(koch_error)?;
        let out = serde_json::json!({ "dimension": s, "l": l });
        run.write_json("koch.json", &out)?;
        return Ok((Status::Ok, out));
    }
    let l = l.ok_or_else(|| usage("--l or --dim is required"))?;
    let ifs = koch::IfsSystem::new(l).map_err(koch_error)?;
    let curve = if snowflake {
        koch::snowflake(l, n).map_err(koch_error)?
    } else {
        koch::approximant(l, n).map_err(koch_error)?
    };
    run.write_curve("koch.csv", &curve)?;
    let mut svg = Svg::new();
    svg.curve(&curve, "black");
    run.write("koch.svg", &svg.render())?;
    let out = serde_json::json!({
        "l": ifs.l,
        "b": ifs.b,
        "theta": ifs.theta,
        "n": n,
        "snowflake": snowflake,
        "points": curve.points().len(),
        "dimension": koch::dimension(l).map_err(koch_error)?,
        "jordan": if snowflake { curve.is_jordan() } else { curve.find_self_intersection().is_none() },
        "open_set": koch::open_set_witness(l).map_err(koch_error)?,
        "closure_mismatch": if snowflake { Some(koch::closure_mismatch(l, n).map_err(koch_error)?) } else { None },
    });
    run.write_json("koch.json", &out)?;
    Ok((Status::Ok, out))
}

fn cert_error(e: CertError) -> anyhow::Error {
    match e {
        CertError::Refused(_) | CertError::PointInUnboundedFace(_) | CertError::NotSimplyConnected { .. } | CertError::NoUnboundedFace => {
            refusal(e.to_string())
        }
        CertError::Graph(GraphError::OnEdge(..)) => usage(e.to_string()),
        e => anyhow::Error::new(e),
    }
}

fn cmd_certify(run: &mut Run, graph: &Path, points: Option<&Path>, polynomial: bool, levels: u32, mc: McArgs) -> Result<Outcome> {
    check_walkers(mc)?;
    run.set_seed(mc.seed);
    let g = load_graph(run, graph)?;
    let pts: Multiset = match points {
        Some(p) => run.read_json(p)?,
        None => {
            let mut m = Multiset::new();
            for f in &g.faces {
                for &(p, k) in f.points.iter() {
                    m.push(p, k);
                }
            }
            m
        }
    };
    let opts = CertOptions {
        levels,
        walkers: mc.walkers,
        seed: mc.seed,
    };
    let report = if polynomial {
        let finite = Multiset::from_entries(pts.iter().filter(|(p, _)| !p.is_infinite()).copied().collect());
        certify::certify_thm19(&g, &finite, opts)
    } else {
        certify::certify_thm18(&g, &pts, opts)
    }
    .map_err(cert_error)?;
    run.write_json("cert.json", &report)?;
    let status = if report.is_consistent() { Status::Ok } else { Status::Negative };
    Ok((status, serde_json::to_value(&report)?))
}

fn cmd_jordan(run: &mut Run, map: &Path, c: f64, grid: usize) -> Result<Outcome> {
    check_level(c)?;
    let r = read_map(run, map)?;
    let scaled = r.scaled(1.0 / c)?;
    let report = certify::jordan_criterion(&scaled, grid_opts(grid)?).map_err(cert_error)?;
    let out = serde_json::json!({ "map": r.to_json(), "level": c, "report": report });
    run.write_json("jordan.json", &out)?;
    let status = if report.verdict == JordanVerdict::Jordan { Status::Ok } else { Status::Negative };
    Ok((status, out))
}

fn cmd_unsolvable(run: &mut Run, path: &Path) -> Result<Outcome> {
    let curve: PolylineCurve = run.read_curve(path, true)?;
    if !curve.is_jordan() {
        return Err(refusal(format!("{} is not a Jordan curve", path.display())));
    }
    let verdict = halfplane_segment_hypothesis(&curve)?;
    let holds = matches!(verdict, HalfplaneVerdict::Holds(_));
    let out = serde_json::json!({
        "curve": path.display().to_string(),
        "hypothesis_holds": holds,
        "matching_pair_solvable": if holds { serde_json::Value::Bool(false) } else { serde_json::Value::Null },
        "witness": verdict,
    });
    run.write_json("unsolvable.json", &out)?;
    Ok((if holds { Status::Ok } else { Status::Negative }, out))
}
