//! Command-line front end for `hflow-core`: configuration, report files
//! (CSV, JSON, SVG) and exit codes.
//!
//! Exit codes: 0 when the check passes, 1 when it fails, 2 for usage,
//! configuration and output errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{write_report, Report, Summary};
use crate::config::{Overrides, ProfileSpec, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hflow", version, about = "Steady Euler and Leray-Hopf Navier-Stokes flows on the hyperbolic plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pointwise residual checks.
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Energy inequality rows for one time profile.
    EnergyReport,
    /// Two Leray-Hopf solutions with the same initial data.
    Nonuniq,
    /// Truncated energies on H² and H³.
    Dodziuk,
}

#[derive(Debug, Subcommand)]
pub enum VerifyTarget {
    /// Steady Euler with the Bernoulli pressure.
    Euler,
    /// Time-rescaled Navier-Stokes flow.
    Ns,
}

#[derive(Debug, Args)]
pub struct Flags {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Pass threshold: residual (verify, nonuniq), energy bridge
    /// (energy-report) or relative tail (dodziuk)
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Seed for probe-point sampling.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Time profile; repeat for `nonuniq`.
    #[arg(long, global = true, value_name = "exp:RATE[:F0]")]
    pub profile: Vec<ProfileSpec>,
    /// Time horizon
    #[arg(long = "t-max", global = true, value_name = "T")]
    pub t_max: Option<f64>,
    /// Time steps on [0, T]
    #[arg(long, global = true, value_name = "K")]
    pub steps: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify { target: VerifyTarget::Euler } => "verify euler",
            Command::Verify { target: VerifyTarget::Ns } => "verify ns",
            Command::EnergyReport => "energy-report",
            Command::Nonuniq => "nonuniq",
            Command::Dodziuk => "dodziuk",
        }
    }
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Verify { target: VerifyTarget::Euler } => commands::verify_euler(cfg),
        Command::Verify { target: VerifyTarget::Ns } => commands::verify_ns(cfg),
        Command::EnergyReport => commands::energy(cfg),
        Command::Nonuniq => commands::nonuniq(cfg),
        Command::Dodziuk => commands::dodziuk(cfg),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let f = &cli.flags;
    let overrides = Overrides {
        out: f.out.clone(),
        plot: f.plot,
        tol: f.tol,
        seed: f.seed,
        profiles: f.profile.clone(),
        t_max: f.t_max,
        steps: f.steps,
    };
    let cfg = match RunConfig::load(f.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hflow: {e}");
            return e.exit_code();
        }
    };
    let report = match execute(&cli.command, &cfg) {
        Ok(r) => r,
        Err(CliError::Numerical(e)) => {
            // still leave a summary behind
            let summary = Summary {
                command: cli.command.name().to_string(),
                pass: false,
                metrics: serde_json::json!({ "error": e.to_string() }),
                config_echo: serde_json::to_value(&cfg).expect("config serializes"),
            };
            let report = Report { summary, files: Vec::new(), failure: None };
            if let Err(w) = write_report(&cfg.out, &report) {
                eprintln!("hflow: {w}");
                return w.exit_code();
            }
            eprintln!("hflow: {} failed: {e}", cli.command.name());
            return 1;
        }
        Err(e) => {
            eprintln!("hflow: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = write_report(&cfg.out, &report) {
        eprintln!("hflow: {e}");
        return e.exit_code();
    }
    let status = if report.summary.pass { "PASS" } else { "FAIL" };
    println!("{}: {status} ({})", report.summary.command, cfg.out.join(report.summary_file()).display());
    if let Some(msg) = &report.failure {
        eprintln!("hflow: {msg}");
    }
    if report.summary.pass {
        0
    } else {
        1
    }
}
