//! `ggr-lab`: experiment driver for ggr-core.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

mod commands;
mod config;
mod output;

use commands::{Outcome, RunContext};
use config::Config;
use output::{CliError, EXIT_VERIFY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Scatter,
    Thermo,
    Diagrams,
    Oracle,
    Bound,
}

#[derive(Debug, Parser)]
#[command(name = "ggr-lab", version, about = "Free-gas thermodynamics, scattering, cluster-expansion diagrams, lattice oracle and pressure bounds")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (`key = value` lines with `[section]` headers).
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when absent (unless the config sets `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cross-check results; exit 1 on any mismatch.
    #[arg(long)]
    verify: bool,
    /// Run the built-in sanity checks of the command.
    #[arg(long)]
    selftest: bool,
    /// Worker threads.
    #[arg(long, env = "GGR_LAB_THREADS")]
    threads: Option<usize>,
    /// Seed for randomized instances; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| CliError::input(format!("{}: {e}", cli.config.display())))?;
    let config = Config::parse(&text)?;
    config.check_keys("run", &["seed", "out"])?;
    let seed = match cli.seed {
        Some(s) => s,
        None => config.usize("run", "seed", Some(0))? as u64,
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(format!("--threads: {e}")))?;
    }
    let out = cli.out.or_else(|| config.str("run", "out").map(PathBuf::from));
    let ctx = RunContext { config, seed, verify: cli.verify, selftest: cli.selftest, out };
    let outcome = match cli.command {
        Command::Scatter => commands::scatter::run(&ctx)?,
        Command::Thermo => commands::thermo::run(&ctx)?,
        Command::Diagrams => commands::diagrams::run(&ctx)?,
        Command::Oracle => commands::oracle::run(&ctx)?,
        Command::Bound => commands::bound::run(&ctx)?,
    };
    outcome.doc.write(&ctx.out)?;
    for (path, body) in &outcome.extra {
        std::fs::write(path, body)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) if outcome.failures.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("verification failed: {f}");
            }
            ExitCode::from(EXIT_VERIFY)
        }
        Err(e) => {
            eprintln!("ggr-lab: {e}");
            ExitCode::from(e.code)
        }
    }
}
