//! `rhaly` command line: runs checks from a config file and writes reports.
//!
//! Exit codes: 0 when every check executed (whatever the verdicts), 1 for
//! configuration errors, 2 for internal or output errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rhaly_core::report::{emit, emit_to, run, run_sweep, Format, Report, RunConfig};
use rhaly_core::Error;

#[derive(Parser)]
#[command(
    name = "rhaly",
    version,
    about = "Certificates for Rhaly operators on Köthe sequence spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Config file (line-oriented `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// json, csv or text.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Truncation length.
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for sampled sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent checks.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Drop per-check timings so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in the config.
    Check,
    /// Taylor coefficients of g by circle quadrature.
    Extract {
        /// exp, geometric:c, poly:a;b;… or file:PATH
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Contour integral against series evaluation of R_g f.
    Validate {
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        f: Option<String>,
        /// Comma-separated complex points, e.g. `0.3,1+0.5i`.
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Run the checks for every value substituted into the θ template.
    Sweep,
}

enum Failure {
    Config(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.into()),
            other => Failure::Internal(other.into()),
        }
    }
}

fn overrides(cli: &Cli) -> Vec<(&'static str, String)> {
    let c = &cli.common;
    let mut o: Vec<(&'static str, String)> = Vec::new();
    let mut put = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            o.push((k, v));
        }
    };
    put("N", c.n.map(|v| v.to_string()));
    put("tol", c.tol.map(|v| v.to_string()));
    put("seed", c.seed.map(|v| v.to_string()));
    put("workers", c.workers.map(|v| v.to_string()));
    put("output.format", c.format.clone());
    match &cli.command {
        Command::Extract {
            g,
            n_max,
            nodes,
            radius,
        } => {
            put("checks", Some("[extract]".into()));
            put("g", g.clone());
            put("n_coeffs", n_max.map(|v| v.to_string()));
            put("quad.M", nodes.map(|v| v.to_string()));
            put("quad.r", radius.map(|v| v.to_string()));
        }
        Command::Validate {
            g,
            f,
            points,
            r0,
            r1,
            nodes,
        } => {
            put("checks", Some("[validate]".into()));
            put("g", g.clone());
            put("f", f.clone());
            put("points", points.as_ref().map(|p| format!("[{p}]")));
            put("quad.r0", r0.map(|v| v.to_string()));
            put("quad.r1", r1.map(|v| v.to_string()));
            put("quad.M", nodes.map(|v| v.to_string()));
        }
        Command::Check | Command::Sweep => {}
    }
    o
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let text = match &cli.common.config {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading config {}", p.display()))
            .map_err(Failure::Config)?,
        None => String::new(),
    };
    let cfg = RunConfig::parse_with_overrides(&text, &overrides(cli))?;
    let report: Report = match cli.command {
        Command::Sweep => run_sweep(&cfg)?,
        _ => run(&cfg)?,
    };
    let report = if cli.common.no_timing {
        report.without_timing()
    } else {
        report
    };
    let format: Format = cfg.format;
    let out = cli
        .common
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from));
    match out {
        Some(path) => emit_to(&report, format, &path)?,
        None => print!("{}", emit(&report, format)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
