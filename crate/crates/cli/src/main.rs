//! `isodensity`: run experiment configs and the calibration suite.
//!
//! Exit codes: 0 all checks pass, 2 config error (nothing written),
//! 3 solver failure (diagnostics written), 4 acceptance failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isodensity::experiment::{self, ExperimentConfig, RunOptions, RunOutcome, EXIT_CONFIG};
use isodensity::par::init_thread_pool;
use isodensity::{Error, Execution};

#[derive(Parser)]
#[command(name = "isodensity", version, about = "Numerical experiments for the double-density isoperimetric problem")]
struct Cli {
    /// Worker threads; 1 runs every loop sequentially.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for every sampling operation (overrides `seed` in the config).
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Run the synthetic-oracle calibration suite.
    Calibrate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = match cli.threads {
        Some(0) => return fail(&Error::Config("--threads must be at least 1".into())),
        Some(1) => Execution::Sequential,
        Some(n) => {
            if let Err(e) = init_thread_pool(n) {
                return fail(&Error::Config(e));
            }
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let opts = RunOptions { out: cli.out, seed: cli.seed, exec };
    let result = match &cli.command {
        Command::Run { config } => ExperimentConfig::load(config).and_then(|cfg| experiment::run(&cfg, &opts)),
        Command::Calibrate => experiment::calibrate(&opts),
    };
    match result {
        Ok(outcome) => report(&outcome),
        Err(e) => fail(&e),
    }
}

fn report(outcome: &RunOutcome) -> ExitCode {
    let failed: Vec<_> = outcome.failures().collect();
    println!(
        "{}: {} checks, {} failed; artifacts in {}",
        outcome.record.name,
        outcome.checks.len(),
        failed.len(),
        outcome.record.output_dir,
    );
    for c in &failed {
        match c.tolerance {
            Some(t) => eprintln!("FAIL {}: {} not within {} of {}", c.name, c.value, t, c.bound),
            None => eprintln!("FAIL {}: {} {} {}", c.name, c.value, c.relation, c.bound),
        }
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn fail(e: &Error) -> ExitCode {
    let code = experiment::exit_code(e);
    if code == EXIT_CONFIG {
        eprintln!("config error: {e}");
    } else {
        eprintln!("run failed: {e}");
    }
    ExitCode::from(code as u8)
}
