//! Command-line laboratory for stochastic degenerate parabolic-hyperbolic
//! conservation laws: solvers, kinetic identity checks, and Monte Carlo
//! experiments with PASS/FAIL/INCONCLUSIVE verdicts.
//!
//! Exit codes: 0 when no claim fails, 1 when any claim fails, 2 on
//! configuration errors. `SKLAB_WORKERS` selects the worker count; results
//! are bitwise independent of it.

// Validation deliberately spells `!(x > 0)` instead of `x <= 0`: the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::LabConfig;
use run::{Outcome, RunError};

#[derive(Parser)]
#[command(
    name = "sklab",
    version,
    about = "stochastic conservation-law laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coupled two-initial-data stability experiment.
    L1Stability(RunArgs),
    /// Nikolskii/BV semi-norm propagation experiment.
    FractionalBv(RunArgs),
    /// Coefficient-perturbation rate experiment.
    ContinuousDependence(RunArgs),
    /// Vanishing-viscosity Cauchy-sequence experiment.
    ViscosityCauchy(RunArgs),
    /// Lagged positive-part temporal regularity experiment.
    TemporalBv(RunArgs),
    /// Kinetic identity battery.
    KineticChecks(RunArgs),
    /// Single trajectory export (finite-volume or spectral solver).
    Solve(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Configuration file ([problem]/[solver]/[noise]/[experiment] sections).
    #[arg(long)]
    config: PathBuf,
    /// Output root; the run writes into <out>/<subcommand>-seed<seed>/.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::L1Stability(_) => "l1-stability",
            Command::FractionalBv(_) => "fractional-bv",
            Command::ContinuousDependence(_) => "continuous-dependence",
            Command::ViscosityCauchy(_) => "viscosity-cauchy",
            Command::TemporalBv(_) => "temporal-bv",
            Command::KineticChecks(_) => "kinetic-checks",
            Command::Solve(_) => "solve",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::L1Stability(a)
            | Command::FractionalBv(a)
            | Command::ContinuousDependence(a)
            | Command::ViscosityCauchy(a)
            | Command::TemporalBv(a)
            | Command::KineticChecks(a)
            | Command::Solve(a) => a,
        }
    }
}

fn configure_workers() {
    if let Ok(value) = std::env::var("SKLAB_WORKERS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    configure_workers();
    let cli = Cli::parse();
    let name = cli.command.name();
    let args = cli.command.args();

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match LabConfig::from_text(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    match run::execute(name, &cfg, &args.out) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(RunError::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(RunError::Runtime(msg)) => {
            eprintln!("run aborted: {msg}");
            ExitCode::from(1)
        }
    }
}
