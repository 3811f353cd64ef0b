use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use lemniscate::curves::PolylineCurve;
use lemniscate::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Bad input rather than a numeric failure; exits with the usage code.
#[derive(Debug)]
pub struct UsageError(pub String);

/// A hypothesis of the requested computation does not hold.
#[derive(Debug)]
pub struct Refusal(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Display for Refusal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
impl std::error::Error for Refusal {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn refusal(msg: impl Into<String>) -> anyhow::Error {
    Refusal(msg.into()).into()
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    args: &'a [String],
    seed: Option<u64>,
    inputs: &'a BTreeMap<String, String>,
    version: &'static str,
    wall_time_s: f64,
}

/// Output directory plus the bookkeeping for `run_manifest.json`.
pub struct Run {
    pub dir: PathBuf,
    command: String,
    args: Vec<String>,
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    started: Instant,
}

impl Run {
    pub fn new(dir: &Path, command: &str, args: Vec<String>) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Run {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            args,
            seed: None,
            inputs: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    /// Reads an input file and records its SHA-256.
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), hex(&Sha256::digest(text.as_bytes())));
        Ok(text)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn read_curve(&mut self, path: &Path, closed: bool) -> Result<PolylineCurve> {
        let text = self.read(path)?;
        PolylineCurve::read_csv(BufReader::new(text.as_bytes()), closed)
            .map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    pub fn write_curve(&self, name: &str, curve: &PolylineCurve) -> Result<()> {
        let mut buf = Vec::new();
        curve.write_csv(&mut buf)?;
        self.write(name, &String::from_utf8(buf)?)
    }

    pub fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            command: &self.command,
            args: &self.args,
            seed: self.seed,
            inputs: &self.inputs,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        self.write_json("run_manifest.json", &manifest)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Minimal SVG of polylines and marked points, y axis pointing up.
pub struct Svg {
    lines: Vec<(Vec<Complex64>, bool, &'static str)>,
    dots: Vec<(Complex64, &'static str)>,
}

impl Svg {
    pub fn new() -> Self {
        Svg {
            lines: Vec::new(),
            dots: Vec::new(),
        }
    }

    pub fn curve(&mut self, c: &PolylineCurve, color: &'static str) {
        self.lines.push((c.points().to_vec(), c.is_closed(), color));
    }

    pub fn path(&mut self, pts: Vec<Complex64>, color: &'static str) {
        self.lines.push((pts, false, color));
    }

    pub fn dot(&mut self, z: Complex64, color: &'static str) {
        self.dots.push((z, color));
    }

    pub fn render(&self) -> String {
        let all = self.lines.iter().flat_map(|l| l.0.iter()).chain(self.dots.iter().map(|d| &d.0));
        let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for z in all {
            lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
        }
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
        let size = 800.0;
        let pad = 20.0;
        let scale = (size - 2.0 * pad) / span;
        let map = |z: &Complex64| (pad + (z.re - lo.re) * scale, size - pad - (z.im - lo.im) * scale);
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        for (pts, closed, color) in &self.lines {
            let coords: Vec<String> = pts
                .iter()
                .map(|z| {
                    let (x, y) = map(z);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let tag = if *closed { "polygon" } else { "polyline" };
            let _ = writeln!(
                out,
                "<{tag} points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\"/>",
                coords.join(" ")
            );
        }
        for (z, color) in &self.dots {
            let (x, y) = map(z);
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
        }
        out.push_str("</svg>\n");
        out
    }
}
