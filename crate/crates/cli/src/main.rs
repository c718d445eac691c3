//! `sobolev`: config-driven runs of the inner and outer solvers and the
//! bound checks.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver non-convergence,
//! 3 validation failure.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Output, Status};
use crate::config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Solver(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

pub fn core_failure(e: sobolev_core::Error) -> Failure {
    use sobolev_core::Error as E;
    match e {
        E::MethodInapplicable(_) | E::AllPointsFailed | E::NoInequality(_) => Failure::Solver(e.to_string()),
        _ => Failure::Config(e.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(name = "sobolev", version, about = "Sharp constants of L-infinity Sobolev-type inequalities on the line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for F(a;V) at one peak location and write the profile `x,u`.
    Inner,
    /// Sample F over a window and write `a,F,certificate`.
    Sweep,
    /// Compute m(V) and the best constant.
    Minimize,
    /// Check computed values against the bound and closed-form reports.
    Verify,
    /// Trapping criterion for a square well, or a `(beta, width)` grid.
    Trapped,
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Element width.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Truncation margin beyond the support hull.
    #[arg(long, global = true)]
    margin: Option<f64>,
    /// Inner solver tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_parser = ["auto", "linear", "obstacle", "transfer"])]
    method: Option<String>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let f = cli.flags;
    let path = f.config.ok_or_else(|| Failure::Config("--config <path> is required".into()))?;
    let overrides = Overrides { out: f.out, h: f.h, margin: f.margin, tol: f.tol, method: f.method, jobs: f.jobs };
    let cfg = RunConfig::load(&path, overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Config(format!("cannot start {:?} workers: {e}", cfg.jobs)))?;
    let output = pool.install(|| match cli.command {
        Command::Inner => commands::cmd_inner(&cfg),
        Command::Sweep => commands::cmd_sweep(&cfg),
        Command::Minimize => commands::cmd_minimize(&cfg),
        Command::Verify => commands::cmd_verify(&cfg),
        Command::Trapped => commands::cmd_trapped(&cfg),
    })?;
    emit(&cfg, &output)?;
    Ok(output)
}

/// CSV goes to the output file or stdout; the summary goes to stdout unless
/// the CSV already occupies it.
fn emit(cfg: &RunConfig, output: &Output) -> Result<(), Failure> {
    let summary = output.summary.to_string();
    let written = match (&output.csv, &cfg.out) {
        (Some(csv), Some(path)) => File::create(path)
            .and_then(|mut f| f.write_all(csv))
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
            .map(|_| io::stdout().write_all(summary.as_bytes())),
        (Some(csv), None) => Ok(io::stdout().write_all(csv).and_then(|_| io::stderr().write_all(summary.as_bytes()))),
        (None, _) => Ok(io::stdout().write_all(summary.as_bytes())),
    }?;
    match written {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Config(format!("cannot write output: {e}"))),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            if out.status == Status::NotConverged {
                eprintln!("warning: some inner solves did not converge");
            }
            ExitCode::from(out.status.code())
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
