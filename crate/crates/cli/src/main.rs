//! `toa` command-line driver.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "toa",
    version,
    about = "Moyal time-of-arrival series, kernels and expectation values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graded series and write it as JSON.
    Series(Common),
    /// Run the bracket, symmetry, kernel-equation and roundtrip checks.
    Verify(Common),
    /// Free-particle (or series) arrival-time averages over Gaussian states.
    Expectation(Common),
    /// Engine versus closed-form table for V = λq⁴.
    Quartic(Common),
    /// Kernel factors on a (q, q′) grid by the series and quadrature routes.
    Kernel(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Treat row-level warnings as failures (exit 1).
    #[arg(long)]
    strict: bool,
    /// Output path; overrides the config's `output`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TOA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::config("TOA_THREADS", format!("`{raw}` is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config("TOA_THREADS", e.to_string()))
}

type Action = fn(&RunConfig) -> Result<commands::Outcome, CliError>;

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let (common, action): (&Common, Action) = match &cli.command {
        Command::Series(c) => (c, commands::series),
        Command::Verify(c) => (c, commands::verify),
        Command::Expectation(c) => (c, commands::expectation),
        Command::Quartic(c) => (c, commands::quartic),
        Command::Kernel(c) => (c, commands::kernel),
    };
    let cfg = RunConfig::load(&common.config)?;
    let outcome = action(&cfg)?;
    let target = common.out.clone().or_else(|| cfg.output.clone());
    output::write_atomic(target.as_deref(), &outcome.contents)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let is_verify = matches!(cli.command, Command::Verify(_));
    if outcome.failed && (is_verify || common.strict) {
        if is_verify {
            return Err(CliError::Verification(outcome.warnings.join("; ")));
        }
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
