//! `fvp`: scenario runner for the spectral final-value solvers.
//!
//! Exit codes: 0 success (backward scenarios: data compatible), 2 data
//! incompatible, 1 usage or validation error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fvp_cli::{run_config_file, validate_config_file, Overrides, RunOutcome};

#[derive(Parser)]
#[command(name = "fvp", version, about = "Spectral solvers for parabolic final value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory receiving the CSV/SVG artifacts (env: FVP_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Override the configuration's RNG seed (env: FVP_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also emit SVG line plots (env: FVP_SVG).
    #[arg(long, global = true)]
    svg: bool,
    /// Override the log-amplification cap (env: FVP_LOG_CAP).
    #[arg(long, global = true)]
    log_cap: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario configuration.
    Run { config: PathBuf },
    /// Check a configuration and report every finding.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints help/version through the error path with success
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let overrides = Overrides {
        out_dir: cli.out_dir,
        seed: cli.seed,
        svg: cli.svg,
        log_cap: cli.log_cap,
    };
    let overrides = match overrides.with_env() {
        Ok(o) => o,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(1);
        }
    };
    match cli.command {
        Command::Run { config } => match run_config_file(&config, &overrides) {
            Ok(RunOutcome::Ok) => ExitCode::SUCCESS,
            Ok(RunOutcome::Incompatible) => ExitCode::from(2),
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        },
        Command::Validate { config } => match validate_config_file(&config) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        },
    }
}
