//! `lemniscate`: trace, analyse and certify rational lemniscates from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::{Refusal, UsageError};

#[derive(Parser, Debug)]
#[command(name = "lemniscate", version, about = "Rational lemniscates, harmonic measure and conformal welding")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = "lemniscate-out")]
    out: PathBuf,
    /// Print the main JSON result to stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct McArgs {
    /// Walkers per walk-on-spheres run.
    #[arg(long, default_value_t = 100_000)]
    walkers: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace |r| = c into edge CSVs, a topology JSON and an SVG.
    Trace {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Build the lemniscate graph (faces, colouring, zeros and poles) from a trace.
    Graph {
        /// `trace.json` written by `trace`.
        #[arg(long)]
        trace: PathBuf,
    },
    /// Harmonic measure of boundary arcs of a face, seen from a base point.
    Measure {
        #[arg(long)]
        graph: PathBuf,
        /// Base point `re,im` or `inf`; its face is the domain.
        #[arg(long, allow_hyphen_values = true)]
        base: String,
        /// JSON `{"arcs": [{"label", "edge", "s0", "s1"}]}`; default: one label per boundary edge.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Conformal welding of closed curves (CSV), optionally with the singularity probe.
    Weld {
        #[arg(long = "curve", required = true)]
        curves: Vec<PathBuf>,
        /// Interior base point `re,im`; default: centroid of the vertices.
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        /// Probe quantile in (0, 1).
        #[arg(long)]
        probe: Option<f64>,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Matching pair f = r, g = c^2/r on a Jordan lemniscate.
    Match {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Koch curve or snowflake approximants, or the parameter for a dimension.
    Koch {
        #[arg(long, required_unless_present = "dim")]
        l: Option<f64>,
        #[arg(long, default_value_t = 5)]
        n: u32,
        #[arg(long)]
        snowflake: bool,
        /// Print the l whose curve has this dimension.
        #[arg(long, conflicts_with = "l")]
        dim: Option<f64>,
    },
    /// Check the harmonic-measure conditions on a graph with candidate points.
    Certify {
        #[arg(long)]
        graph: PathBuf,
        /// Multiset JSON; default: the points stored in the graph manifest.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Polynomial form: points are the zeros, infinity carries the degree.
        #[arg(long)]
        polynomial: bool,
        #[arg(long, default_value_t = lemniscate::certify::DEFAULT_LEVELS)]
        levels: u32,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Critical-value criterion for |r| = c to be an analytic Jordan curve.
    Jordan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Half-plane segment test: a closed curve whose hull contact is one segment.
    Unsolvable {
        #[arg(long)]
        curve: PathBuf,
    },
}

/// Result class of a command that ran to completion.
pub enum Status {
    Ok,
    /// Negative verdict (violated, not Jordan, hypothesis fails).
    Negative,
    /// A hypothesis of the computation does not hold; report already written.
    Refused,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::from(2),
        Ok(Status::Refused) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<UsageError>().is_some() {
                1
            } else if e.downcast_ref::<Refusal>().is_some() {
                3
            } else {
                4
            };
            ExitCode::from(code)
        }
    }
}
