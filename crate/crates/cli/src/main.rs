//! `wsaw`: command-line runner for walk experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wsaw_core::Error;

mod commands;
mod config;
mod output;

use config::{Command, CommonArgs, ExperimentConfig};

#[derive(Parser)]
#[command(name = "wsaw", version, about = "Weakly self-avoiding walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact c_n and mean-square displacement by enumeration.
    Enumerate(CommonArgs),
    /// KJK identity residuals and J partial sums over all short walks.
    LaceCheck(CommonArgs),
    /// Chain-growth estimates of c_k and E|w(k)|^2.
    Perm(CommonArgs),
    /// Fixed-length Metropolis estimates and traces.
    Metropolis(CommonArgs),
    /// Characteristic functions of rescaled increments against the Gaussian.
    Fdd(CommonArgs),
    /// Second-moment tightness ratios of rescaled paths.
    Tightness(CommonArgs),
    /// Exact and sampled c_n^T / c_n.
    DiluteRatio(CommonArgs),
    /// Tail of sup |w(k)| / r on small tori.
    Degenerate(CommonArgs),
    /// Torus and Z^d two-point functions side by side.
    Plateau(CommonArgs),
    /// Re-run the experiment recorded in a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output directory of the recorded config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn resolve(cmd: Cmd) -> wsaw_core::Result<ExperimentConfig> {
    let (command, args) = match cmd {
        Cmd::Run { config, out } => {
            let mut cfg = output::read_config(&config)?;
            if let Some(out) = out {
                cfg.out = out;
            }
            cfg.validate()?;
            return Ok(cfg);
        }
        Cmd::Enumerate(a) => (Command::Enumerate, a),
        Cmd::LaceCheck(a) => (Command::LaceCheck, a),
        Cmd::Perm(a) => (Command::Perm, a),
        Cmd::Metropolis(a) => (Command::Metropolis, a),
        Cmd::Fdd(a) => (Command::Fdd, a),
        Cmd::Tightness(a) => (Command::Tightness, a),
        Cmd::DiluteRatio(a) => (Command::DiluteRatio, a),
        Cmd::Degenerate(a) => (Command::Degenerate, a),
        Cmd::Plateau(a) => (Command::Plateau, a),
    };
    ExperimentConfig::resolve(command, &args)
}

fn fail(e: &Error) -> ExitCode {
    let (kind, code) = match e {
        Error::InvalidParameter(_) | Error::Precondition(_) => ("invalid-config", EXIT_INVALID_CONFIG),
        Error::BudgetExceeded { .. } => ("budget-exceeded", EXIT_BUDGET),
        Error::DegenerateSampler { .. } => ("degenerate-sampler", EXIT_FAILURE),
        Error::Io(_) => ("io", EXIT_FAILURE),
    };
    eprintln!("error[{kind}]: {}", e.to_string().replace('\n', " "));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(cli.command) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let result = commands::run(&cfg).and_then(|out| output::write_all(&cfg, &out.tables).map(|_| out.summary));
    match result {
        Ok(summary) => {
            println!("{}: {summary}", cfg.command.name());
            println!("wrote {}", cfg.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
