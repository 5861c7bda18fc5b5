use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use visco_dg::config::{load_config, ConfigError, RunConfig};
use visco_dg::workflows::{self, WorkflowError};

/// Nodal DG solver for the 2D anisotropic viscoelastic wave equation.
#[derive(Debug, Parser)]
#[command(name = "viscodg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time-domain run with point source, receivers and snapshots.
    Simulate(Args),
    /// Plane-wave refinement study with least-squares rates.
    Convergence(Args),
    /// Dense operator spectrum over the penalty sweep.
    Spectrum(Args),
    /// Solver traces against the analytic Green's function.
    GreensCompare(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &WorkflowError) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else if e.is_io() {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

fn run(cmd: &Command, cfg: &RunConfig, out: &Path) -> Result<String, WorkflowError> {
    Ok(match cmd {
        Command::Simulate(_) => workflows::simulate(cfg, None, Some(out))?.summary.render(),
        Command::Convergence(_) => workflows::convergence(cfg, Some(out))?.summary.render(),
        Command::Spectrum(_) => workflows::spectrum(cfg, Some(out))?.1.render(),
        Command::GreensCompare(_) => workflows::greens_compare(cfg, Some(out))?.summary.render(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Simulate(a) | Command::Convergence(a) | Command::Spectrum(a) | Command::GreensCompare(a) => a,
    };
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, ConfigError::Read { .. }) { EXIT_IO } else { EXIT_VALIDATION };
            return ExitCode::from(code);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return ExitCode::from(EXIT_IO);
    }
    match run(&cli.command, &cfg, &args.out) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
