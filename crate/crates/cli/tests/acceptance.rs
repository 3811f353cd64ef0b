//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use lemniscate::certify::{certify_thm18, jordan_criterion, riemann_hurwitz_all, CertOptions, JordanVerdict, Verdict};
use lemniscate::curves::PolylineCurve;
use lemniscate::koch;
use lemniscate::lemgraph::{Color, LemGraph};
use lemniscate::matching::{lemniscate_pair, verify_matching, MatchingError, SideCondition};
use lemniscate::potential::{
    arc_measure_oracle, check_prop27, harmonic_measure_mc, poisson_arc_measure, BoundaryPartition, LabeledArc, Region,
};
use lemniscate::ratfun::{MapJson, Multiset, Poly, RationalMap, SpherePoint};
use lemniscate::tracer::{trace, TraceOptions};
use lemniscate::welding::{functional_equation_residual, poly_outer_oracle, singularity_probe, weld};
use lemniscate::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn z2m1() -> Poly {
    Poly::from_real(&[-1.0, 0.0, 1.0])
}

fn zeros_and_poles(r: &RationalMap) -> Multiset {
    let mut pts = Multiset::new();
    for &(p, m) in r.zeros().iter().chain(r.poles().iter()) {
        pts.push(p, m);
    }
    pts
}

fn graph_of(r: &RationalMap, level: f64) -> Result<LemGraph, String> {
    let t = trace(r, level, TraceOptions::default()).map_err(|e| e.to_string())?;
    LemGraph::build(&t, r)
        .and_then(|g| g.assign_points(&zeros_and_poles(r)))
        .map_err(|e| e.to_string())
}

#[derive(Deserialize)]
struct SuiteEntry {
    name: String,
    map: MapJson,
    c: f64,
}

fn suite() -> Vec<(String, RationalMap, f64)> {
    let entries: Vec<SuiteEntry> = serde_json::from_str(include_str!("../../../data/suite.json")).unwrap();
    entries
        .into_iter()
        .map(|e| (e.name, RationalMap::from_json(&e.map).unwrap(), e.c))
        .collect()
}

fn c1_trace_fidelity() -> Outcome {
    let r = RationalMap::polynomial(Poly::z()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let t = trace(&r, 1.0, TraceOptions::with_grid(512)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let residual = t.edges.iter().flat_map(|e| e.curve.points()).map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    ensure(residual <= 1e-9, || format!("max ||z| - 1| = {residual:e}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("max ||z|-1| = {residual:.1e}, {elapsed:.0?}"))
}

fn c2_topology() -> Outcome {
    let r = RationalMap::polynomial(z2m1()).map_err(|e| e.to_string())?;
    let g = graph_of(&r, 1.0)?;
    ensure(g.vertices.len() == 1 && g.vertices[0].point.norm() < 1e-9 && g.vertices[0].degree == 4, || {
        format!("vertices {:?}", g.vertices)
    })?;
    ensure(g.edges.len() == 2 && g.faces.len() == 3, || format!("E = {}, F = {}", g.edges.len(), g.faces.len()))?;
    ensure(g.validate().violations.is_empty(), || format!("{:?}", g.validate().violations))?;
    for e in &g.edges {
        let (l, rt) = (g.faces[e.left].color, g.faces[e.right].color);
        ensure(l.is_some() && rt.is_some() && l != rt, || format!("edge colours {l:?} {rt:?}"))?;
    }
    let white = g.faces.iter().filter(|f| f.color == Some(Color::White)).count();
    ensure(white == 2, || format!("{white} white faces"))?;
    ensure(g.euler_audit().holds, || format!("{:?}", g.euler_audit()))?;
    let t2 = trace(&r, 2.0, TraceOptions::default()).map_err(|e| e.to_string())?;
    ensure(t2.is_jordan(), || format!("c = 2 signature {:?}", t2.signature()))?;
    let g2 = graph_of(&r, 2.0)?;
    ensure(g2.euler_audit().holds, || format!("{:?}", g2.euler_audit()))?;
    Ok("c=1: V=1 (deg 4), E=2, F=3, 2-coloured; c=2: one Jordan edge; Euler holds".into())
}

fn c3_blaschke_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut disk = move || Complex64::from_polar(0.95 * unit().sqrt(), 2.0 * PI * unit());
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..100 {
        let n = 1 + k % 6;
        let zeros: Vec<Complex64> = (0..n).map(|_| disk()).collect();
        let z = disk();
        worst = worst.max(check_prop27(&zeros, z).map_err(|e| e.to_string())?);
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || format!("residual {worst:e}"))?;
    ensure(elapsed < Duration::from_millis(100), || format!("took {elapsed:?}"))?;
    Ok(format!("max residual {worst:.1e} over 100 configurations, {elapsed:.1?}"))
}

fn c4_harmonic_measure() -> Outcome {
    let n = 4096;
    let circle = PolylineCurve::circle(c(0.0, 0.0), 1.0, n);
    let len = circle.length();
    let centred = Region::bounded(vec![vec![circle.clone()]], c(0.0, 0.0)).map_err(|e| e.to_string())?;
    let quarter = BoundaryPartition::new(vec![LabeledArc {
        label: "q".into(),
        curve: 0,
        s0: 0.0,
        s1: len / 4.0,
    }]);
    let h = harmonic_measure_mc(&centred, SpherePoint::finite(0.0, 0.0), &quarter, 100_000, 4).map_err(|e| e.to_string())?;
    let q = h.get("q").unwrap();
    ensure((q.value - 0.25).abs() <= 3.0 * q.stderr, || format!("quarter arc {} ± {}", q.value, q.stderr))?;

    let off = Region::bounded(vec![vec![circle.clone()]], c(0.3, 0.0)).map_err(|e| e.to_string())?;
    let right = BoundaryPartition::new(vec![
        LabeledArc {
            label: "right".into(),
            curve: 0,
            s0: 0.0,
            s1: len / 4.0,
        },
        LabeledArc {
            label: "right".into(),
            curve: 0,
            s0: 0.75 * len,
            s1: len,
        },
    ]);
    let h = harmonic_measure_mc(&off, SpherePoint::finite(0.3, 0.0), &right, 100_000, 5).map_err(|e| e.to_string())?;
    let e = h.get("right").unwrap();
    let want = poisson_arc_measure(c(0.3, 0.0), -PI / 2.0, PI / 2.0);
    ensure((e.value - want).abs() <= 3.0 * e.stderr, || format!("right half {} vs Poisson {want}", e.value))?;

    let fine = BoundaryPartition::dyadic(0, &circle, 3, "f");
    let coarse = BoundaryPartition::new(fine.arcs.iter().map(|a| LabeledArc { label: "all".into(), ..a.clone() }).collect());
    let base = SpherePoint::finite(0.3, 0.0);
    let hf = harmonic_measure_mc(&off, base, &fine, 20_000, 6).map_err(|e| e.to_string())?;
    let hc = harmonic_measure_mc(&off, base, &coarse, 20_000, 6).map_err(|e| e.to_string())?;
    let count = |v: f64| (v * 20_000.0).round() as u64;
    let sum: u64 = fine.labels().iter().map(|l| count(hf.get(l).unwrap().value)).sum();
    ensure(sum == count(hc.get("all").unwrap().value), || "refinement does not add up".into())?;
    Ok(format!(
        "quarter {:.4} ± {:.4}; right half {:.4} vs {want:.4}; additivity exact",
        q.value, q.stderr, e.value
    ))
}

fn c5_zero_measure_oracle() -> Outcome {
    let r = RationalMap::polynomial(z2m1()).map_err(|e| e.to_string())?;
    let g = graph_of(&r, 2.0)?;
    let start = Instant::now();
    let inner = g.faces.iter().find(|f| !f.unbounded).ok_or("no bounded face")?;
    let region = Region::from_face(&g, inner.id).map_err(|e| e.to_string())?;
    let curve = region.curves()[0].clone();
    let partition = BoundaryPartition::dyadic(0, &curve, 3, "b");
    let (mut sums, mut vars) = (vec![0.0; 8], vec![0.0; 8]);
    for (k, &(z, m)) in inner.points.iter().enumerate() {
        let h = harmonic_measure_mc(&region, z, &partition, 1_000_000, 50 + k as u64).map_err(|e| e.to_string())?;
        for a in 0..8 {
            let e = h.get(&format!("b/{a}")).unwrap();
            sums[a] += m as f64 * e.value;
            vars[a] += (m as f64 * e.stderr).powi(2);
        }
    }
    let mut worst: f64 = 0.0;
    for (a, arc) in partition.arcs.iter().enumerate() {
        let want = arc_measure_oracle(&r, &curve, arc.s0, arc.s1).map_err(|e| e.to_string())?;
        let tol = (3.0 * vars[a].sqrt()).max(5e-3);
        ensure((sums[a] - want).abs() <= tol, || format!("arc {a}: {} vs {want}", sums[a]))?;
        worst = worst.max((sums[a] - want).abs());
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("8 arcs, max |MC - oracle| = {worst:.2e}, {elapsed:.1?}"))
}

fn c6_welding_oracle() -> Outcome {
    let p = z2m1();
    let r = RationalMap::polynomial(p.clone()).map_err(|e| e.to_string())?;
    let t = trace(&r, 2.0, TraceOptions::default()).map_err(|e| e.to_string())?;
    let traced = &t.edges[0].curve;
    let curve = if traced.signed_area() > 0.0 { traced.clone() } else { traced.reversed() };
    let oracle = poly_outer_oracle(&p, &curve).map_err(|e| e.to_string())?;
    let w = weld(&curve, c(0.0, 0.0), 400_000, 5).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (i, q) in w.pairs.iter().enumerate() {
        let want = if i > 0 && q.vertex == 0 { 2.0 * PI } else { oracle[q.vertex] };
        let d = (q.theta_out - want).abs();
        ensure(d <= (3.0 * q.sigma_out).max(1e-2), || format!("vertex {}: {} vs {want}", q.vertex, q.theta_out))?;
        worst = worst.max(d);
    }
    let sigma = w.pairs.iter().map(|q| q.sigma_out).fold(0.0, f64::max);
    let fe = functional_equation_residual(&p, 2.0, &curve, &w);
    let fe_tol = (2.0 * 3.0 * sigma).max(2e-2);
    ensure(fe <= fe_tol, || format!("functional equation residual {fe} > {fe_tol}"))?;

    let circle = PolylineCurve::circle(c(0.0, 0.0), 1.0, 128);
    let id = weld(&circle, c(0.0, 0.0), 100_000, 7).map_err(|e| e.to_string())?;
    for q in &id.pairs {
        let tol = (3.0 * (q.sigma_in + q.sigma_out)).max(1e-2);
        ensure((q.theta_in - q.theta_out).abs() <= tol, || format!("circle welding off at vertex {}", q.vertex))?;
    }
    Ok(format!("max |theta_out - oracle| = {worst:.2e}; functional equation {fe:.2e}; circle identity"))
}

fn c7_matching() -> Outcome {
    let pts: Vec<Complex64> = (0..2000).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 2000.0)).collect();
    let exact = verify_matching(|z| z, |z| 1.0 / z, &pts);
    ensure(exact <= 1e-12, || format!("circle residual {exact:e}"))?;
    let r = RationalMap::polynomial(z2m1()).map_err(|e| e.to_string())?;
    let pair = lemniscate_pair(&r, 2.0, TraceOptions::default()).map_err(|e| e.to_string())?;
    let traced = verify_matching(|z| z * z - 1.0, |z| 4.0 / (z * z - 1.0), pair.curve.points());
    ensure(traced <= 1e-8, || format!("traced residual {traced:e}"))?;

    let refused = |num: &[f64], den: &[f64]| -> Result<Vec<SideCondition>, String> {
        let r = RationalMap::new(Poly::from_real(num), Poly::from_real(den)).map_err(|e| e.to_string())?;
        match lemniscate_pair(&r, 1.0, TraceOptions::default()) {
            Err(MatchingError::SideConditions(f)) => Ok(f.into_iter().map(|f| f.condition).collect()),
            other => Err(format!("expected a refusal, got {other:?}")),
        }
    };
    let finite_at_inf = refused(&[0.0, 2.0], &[-3.0, 1.0])?;
    ensure(finite_at_inf == [SideCondition::PoleAtInfinity], || format!("{finite_at_inf:?}"))?;
    let inverse = refused(&[1.0], &[0.0, 1.0])?;
    ensure(
        inverse == [SideCondition::NoPoleInside, SideCondition::NoZeroOutside, SideCondition::PoleAtInfinity],
        || format!("{inverse:?}"),
    )?;
    Ok(format!("circle {exact:.1e}, traced {traced:.1e}; (iii) alone and (i)+(ii)+(iii) refused"))
}

fn c8_koch() -> Outcome {
    let frozen = [
        (0.3, 0.22360679774997894, 0.8410686705679302),
        (1.0 / 3.0, 0.28867513459481287, 1.0471975511965976),
        (0.45, 0.4472135954999579, 1.4594553124539327),
    ];
    for (l, b, theta) in frozen {
        let ifs = koch::IfsSystem::new(l).map_err(|e| e.to_string())?;
        ensure((ifs.b - b).abs() <= 1e-14 && (ifs.theta - theta).abs() <= 1e-14, || format!("l = {l}: {ifs:?}"))?;
    }
    let lo = koch::dimension(0.25 + 1e-9).map_err(|e| e.to_string())?;
    let hi = koch::dimension(0.5 - 1e-9).map_err(|e| e.to_string())?;
    ensure((lo - 1.0).abs() < 1e-8 && (hi - 2.0).abs() < 1e-8, || format!("endpoints {lo} {hi}"))?;
    let mut worst: f64 = 0.0;
    for l in [0.3, 0.3468, 0.4, 0.45, 0.4588] {
        for n in 0..=6 {
            let s = koch::snowflake(l, n).map_err(|e| e.to_string())?;
            ensure(s.is_jordan(), || format!("snowflake l = {l}, n = {n} is not Jordan"))?;
            worst = worst.max(koch::closure_mismatch(l, n).map_err(|e| e.to_string())?);
        }
        ensure(koch::open_set_witness(l).map_err(|e| e.to_string())?.holds, || format!("open set fails at l = {l}"))?;
    }
    ensure(worst <= 1e-12, || format!("closure mismatch {worst:e}"))?;
    Ok(format!("b, theta frozen to 1e-14; s -> 1, 2; closure {worst:.1e}; 35 Jordan snowflakes; open set holds"))
}

fn c9_certification() -> Outcome {
    let opts = CertOptions {
        walkers: 40_000,
        ..CertOptions::default()
    };
    let suite = suite();
    ensure(suite.len() >= 10, || format!("only {} maps", suite.len()))?;
    for (name, r, level) in &suite {
        let g = graph_of(r, *level).map_err(|e| format!("{name}: {e}"))?;
        let rep = certify_thm18(&g, &zeros_and_poles(r), opts).map_err(|e| format!("{name}: {e}"))?;
        ensure(rep.is_consistent(), || format!("{name}: {:?}", rep.verdict))?;
    }
    let r = RationalMap::polynomial(z2m1()).map_err(|e| e.to_string())?;
    let g = graph_of(&r, 2.0)?;
    let withheld = Multiset::from_entries(vec![(SpherePoint::finite(1.0, 0.0), 1), (SpherePoint::Infinity, 2)]);
    let rep = certify_thm18(&g, &withheld, CertOptions::default()).map_err(|e| e.to_string())?;
    ensure(matches!(rep.verdict, Verdict::Violated { .. }), || "withheld zero not detected".into())?;
    let z = rep.condition2.iter().map(|t| t.max_z_score()).fold(0.0, f64::max);
    ensure(z >= 5.0, || format!("max z-score {z}"))?;
    Ok(format!("{} maps consistent; withheld zero violated, max z-score {z:.1e}", suite.len()))
}

fn c10_jordan_criterion() -> Outcome {
    let mut audits = 0;
    for (name, r, level) in suite() {
        let scaled = r.scaled(1.0 / level).map_err(|e| e.to_string())?;
        let rep = jordan_criterion(&scaled, TraceOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let t = trace(&r, level, TraceOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        ensure((rep.verdict == JordanVerdict::Jordan) == t.is_jordan(), || {
            format!("{name}: {:?} vs signature {:?}", rep.verdict, t.signature())
        })?;
        let g = graph_of(&r, level)?;
        for rh in riemann_hurwitz_all(&r, &g).map_err(|e| e.to_string())? {
            ensure(rh.holds, || format!("{name}: {rh:?}"))?;
            audits += 1;
        }
    }
    let bernoulli = RationalMap::polynomial(z2m1()).map_err(|e| e.to_string())?;
    let rep = jordan_criterion(&bernoulli, TraceOptions::default()).map_err(|e| e.to_string())?;
    ensure(rep.verdict == JordanVerdict::BoundaryCritical, || format!("z^2-1: {:?}", rep.verdict))?;
    Ok(format!("verdicts agree with topology; z^2-1 boundary-critical; {audits} face audits exact"))
}

fn c11_singularity_probe() -> Outcome {
    let walkers = 200_000;
    let (mut snow, mut ctrl) = (Vec::new(), Vec::new());
    for n in 3..=5u32 {
        let s = koch::snowflake(0.45, n).map_err(|e| e.to_string())?;
        let base = s.points().iter().sum::<Complex64>() / s.points().len() as f64;
        let ws = weld(&s, base, walkers, 11).map_err(|e| e.to_string())?;
        snow.push(singularity_probe(&ws, 0.9).map_err(|e| e.to_string())?);
        let e = PolylineCurve::ellipse(c(0.0, 0.0), 2.0, 1.0, s.points().len());
        let we = weld(&e, c(0.0, 0.0), walkers, 13).map_err(|e| e.to_string())?;
        ctrl.push(singularity_probe(&we, 0.9).map_err(|e| e.to_string())?);
    }
    ensure(snow.windows(2).all(|w| w[1] < w[0]), || format!("snowflake probe {snow:?}"))?;
    ensure(ctrl.iter().all(|v| (v - ctrl[0]).abs() <= 0.1 * ctrl[0]), || format!("ellipse control {ctrl:?}"))?;
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" > ");
    Ok(format!("evidence only: snowflake probe {} ; ellipse {ctrl:.3?}", list(&snow)))
}

fn write_inputs(dir: &Path) -> Result<(), String> {
    let w = |name: &str, text: &str| std::fs::write(dir.join(name), text).map_err(|e| e.to_string());
    w("r.json", r#"{"num": [[-1, 0], [0, 0], [1, 0]], "den": [[1, 0]]}"#)?;
    w("part.json", r#"{"arcs": [{"label": "a", "edge": 0, "s0": 0.0, "s1": 1.5}, {"label": "b", "edge": 0, "s0": 1.5, "s1": 3.0}]}"#)?;
    let mut square = String::from("re,im\n");
    for (x, y) in [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
        square.push_str(&format!("{x},{y}\n"));
    }
    w("square.csv", &square)
}

fn run_pipeline(bin: &Path, inputs: &Path, out: &Path, threads: usize) -> Result<(), String> {
    let t = threads.to_string();
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let o = |sub: &str| sub.to_string();
    let i = |f: &str| inputs.join(f).display().to_string();
    let steps: Vec<Vec<String>> = vec![
        vec!["--out".into(), o("trace"), "trace".into(), "--map".into(), i("r.json"), "--c".into(), "2".into()],
        vec!["--out".into(), o("graph"), "graph".into(), "--trace".into(), o("trace/trace.json")],
        vec![
            "--out".into(), o("measure"), "measure".into(), "--graph".into(), o("graph/graph.json"),
            "--base".into(), "0.1,0.2".into(), "--partition".into(), i("part.json"), "--walkers".into(), "20000".into(),
            "--seed".into(), "3".into(),
        ],
        vec![
            "--out".into(), o("certify"), "certify".into(), "--graph".into(), o("graph/graph.json"),
            "--walkers".into(), "20000".into(), "--seed".into(), "4".into(),
        ],
        vec![
            "--out".into(), o("weld"), "weld".into(), "--curve".into(), o("graph/edge_0.csv"),
            "--walkers".into(), "20000".into(), "--probe".into(), "0.9".into(),
        ],
        vec!["--out".into(), o("match"), "match".into(), "--map".into(), i("r.json"), "--c".into(), "2".into()],
        vec!["--out".into(), o("koch"), "koch".into(), "--l".into(), "0.3468".into(), "--n".into(), "5".into(), "--snowflake".into()],
        vec!["--out".into(), o("jordan"), "jordan".into(), "--map".into(), i("r.json"), "--c".into(), "2".into()],
        vec!["--out".into(), o("unsolvable"), "unsolvable".into(), "--curve".into(), i("square.csv")],
    ];
    for args in steps {
        let status = Command::new(bin)
            .current_dir(out)
            .args(["--threads", &t])
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)))?;
    }
    Ok(())
}

fn collect(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n != "run_manifest.json") {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn c12_reproducibility() -> Outcome {
    let bin = Path::new(env!("CARGO_BIN_EXE_lemniscate"));
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inputs = tmp.path().join("in");
    std::fs::create_dir_all(&inputs).map_err(|e| e.to_string())?;
    write_inputs(&inputs)?;
    let runs = [(1, "a"), (8, "b"), (8, "c")];
    for (threads, name) in runs {
        run_pipeline(bin, &inputs, &tmp.path().join(name), threads)?;
    }
    let a = collect(&tmp.path().join("a"));
    ensure(a.len() >= 18, || format!("only {} output files", a.len()))?;
    for (_, name) in &runs[1..] {
        let b = collect(&tmp.path().join(name));
        ensure(a.keys().eq(b.keys()), || "different output file sets".into())?;
        for (path, bytes) in &a {
            ensure(b[path] == *bytes, || format!("{} differs", path.display()))?;
        }
    }
    let manifests = ["trace", "graph", "measure", "certify", "weld", "match", "koch", "jordan", "unsolvable"]
        .iter()
        .all(|s| tmp.path().join("a").join(s).join("run_manifest.json").is_file());
    ensure(manifests, || "missing run manifest".into())?;
    Ok(format!("{} files byte-identical at --threads 1 and 8 (twice)", a.len()))
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("trace fidelity", c1_trace_fidelity),
        ("topology", c2_topology),
        ("Blaschke Green identity", c3_blaschke_identity),
        ("harmonic measure engine", c4_harmonic_measure),
        ("zero-measure arc oracle", c5_zero_measure_oracle),
        ("welding oracle", c6_welding_oracle),
        ("matching pairs", c7_matching),
        ("Koch curves", c8_koch),
        ("certification regression", c9_certification),
        ("Jordan criterion", c10_jordan_criterion),
        ("singularity probe trend", c11_singularity_probe),
        ("reproducibility", c12_reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
