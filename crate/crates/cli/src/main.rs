use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use blaschke_cli::config::{self, Profile, PROFILE_ENV};
use blaschke_cli::{output, run, CliError};

/// Runs one experiment described by a TOML config and writes its artifacts.
#[derive(Debug, Parser)]
#[command(name = "blaschke", version, after_help = after_help())]
struct Args {
    /// Experiment config (TOML, `version = 1`).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config's `output_path` (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn after_help() -> String {
    format!(
        "Tolerance profile: {PROFILE_ENV}=standard|strict|relaxed (default standard).\n\
         Exit codes: 0 success (verification outcomes are in the status field), \
         2 schema or plot-kind error, 3 numerical nonconvergence, 4 I/O failure."
    )
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("blaschke: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Schema(format!("{}: not UTF-8 ({e})", args.config.display())))?;
    let cfg = config::parse(text)?;
    let tol = cfg.tolerances.resolve(Profile::from_env()?)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let outcome = run::run(&cfg, &bytes, seed, &tol)?;
    let paths = output::write_all(&dir, &outcome.artifacts)?;
    if !args.quiet {
        println!("{}: status {}", cfg.command.as_str(), outcome.status);
        for p in &paths {
            println!("  wrote {}", p.display());
        }
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
