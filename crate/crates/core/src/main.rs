use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use vsheet::cli_io::{compare_oracle, parse_config, run, validate_operators, Outcome, RunConfig, THREADS_ENV};
use vsheet::Error;

#[derive(Parser)]
#[command(name = "vsheet", version, about = "Analytic vortex sheets and Muskat interfaces by Picard iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output.dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator backend equivalence and weighted-norm inequality suite.
    ValidateOperators {
        #[arg(long)]
        config: PathBuf,
    },
    /// Picard solution against the Runge–Kutta oracle on a short horizon.
    CompareOracle {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn report_error(e: &Error) {
    match e {
        Error::Violations(list) => {
            eprintln!("invalid configuration ({} problems):", list.len());
            for v in list {
                eprintln!("  - {v}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

fn print_json<S: Serialize>(value: &S) {
    match serde_json::to_string_pretty(value) {
        Ok(s) => println!("{s}"),
        Err(e) => eprintln!("error: {e}"),
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))
}

fn execute(cli: Cli) -> Result<Outcome, Error> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let out = out
                .or_else(|| cfg.output.dir.clone())
                .ok_or_else(|| Error::Config("no output directory: pass --out or set output.dir".into()))?;
            let summary = run(&cfg, &out)?;
            if let Some(e) = &summary.error {
                eprintln!("error: {e}");
            }
            print_json(&summary);
            Ok(summary.outcome)
        }
        Command::ValidateOperators { config } => {
            let report = validate_operators(&load(&config)?)?;
            print_json(&report);
            Ok(if report.all_passed { Outcome::Converged } else { Outcome::Diverged })
        }
        Command::CompareOracle { config } => {
            let report = compare_oracle(&load(&config)?)?;
            print_json(&report);
            Ok(if report.passed { Outcome::Converged } else { Outcome::Diverged })
        }
    }
}

fn main() -> ExitCode {
    let outcome = execute(Cli::parse()).unwrap_or_else(|e| {
        report_error(&e);
        Outcome::of_error(&e)
    });
    ExitCode::from(outcome.exit_code() as u8)
}
