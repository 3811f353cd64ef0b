use std::path::Path;
use std::process::{Command, Output};

fn lemniscate(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lemniscate"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(lemniscate(tmp.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(lemniscate(tmp.path(), &["trace", "--map", "missing.json", "--c", "1"]).status.code(), Some(1));
    write(tmp.path(), "r.json", r#"{"num": [[0, 0], [1, 0]], "den": [[1, 0]]}"#);
    assert_eq!(lemniscate(tmp.path(), &["trace", "--map", "r.json", "--c", "-1"]).status.code(), Some(1));
    assert_eq!(lemniscate(tmp.path(), &["koch", "--l", "0.6"]).status.code(), Some(1));
    assert_eq!(lemniscate(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn verdicts_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write(dir, "bernoulli.json", r#"{"num": [[-1, 0], [0, 0], [1, 0]], "den": [[1, 0]]}"#);
    write(dir, "inverse.json", r#"{"num": [[1, 0]], "den": [[0, 0], [1, 0]]}"#);
    write(dir, "square.csv", "re,im\n0,0\n0.5,0\n1,0\n1,1\n0,1\n");
    write(dir, "bowtie.csv", "re,im\n0,0\n1,1\n1,0\n0,1\n");

    let out = lemniscate(dir, &["--json", "jordan", "--map", "bernoulli.json", "--c", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["verdict"], "jordan");
    assert_eq!(lemniscate(dir, &["jordan", "--map", "bernoulli.json", "--c", "1"]).status.code(), Some(2));
    assert_eq!(lemniscate(dir, &["jordan", "--map", "inverse.json", "--c", "1"]).status.code(), Some(3));
    assert_eq!(lemniscate(dir, &["match", "--map", "inverse.json", "--c", "1"]).status.code(), Some(3));
    assert_eq!(lemniscate(dir, &["unsolvable", "--curve", "square.csv"]).status.code(), Some(0));
    assert_eq!(lemniscate(dir, &["unsolvable", "--curve", "bowtie.csv"]).status.code(), Some(3));
    assert!(dir.join("lemniscate-out/run_manifest.json").is_file());
}

#[test]
fn trace_graph_certify_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write(dir, "r.json", r#"{"num": [[-1, 0], [0, 0], [1, 0]], "den": [[1, 0]]}"#);
    assert!(lemniscate(dir, &["--out", "t", "trace", "--map", "r.json", "--c", "1"]).status.success());
    assert!(dir.join("t/edge_1.csv").is_file());
    assert!(lemniscate(dir, &["--out", "g", "graph", "--trace", "t/trace.json"]).status.success());
    let graph: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("g/graph.json")).unwrap()).unwrap();
    assert_eq!(graph["faces"].as_array().unwrap().len(), 3);
    let ok = lemniscate(dir, &["--out", "c", "certify", "--graph", "g/graph.json", "--walkers", "20000"]);
    assert_eq!(ok.status.code(), Some(0));
    write(dir, "pts.json", r#"{"entries": [[[1, 0], 1], ["inf", 2]]}"#);
    let bad = lemniscate(dir, &["--out", "c2", "certify", "--graph", "g/graph.json", "--points", "pts.json", "--walkers", "20000"]);
    assert_eq!(bad.status.code(), Some(2));
}
