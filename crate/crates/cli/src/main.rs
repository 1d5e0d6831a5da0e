//! `rdes`: run, convergence, audit and flux-recovery drivers.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdes::par::Execution;

use commands::Options;
use error::CliError;

#[derive(Parser)]
#[command(name = "rdes", version, about = "Residual distribution solver for 2D scalar conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March one problem and write history.csv and field.vtk.
    Run(Common),
    /// Steady solves on every size in mesh.sizes; writes convergence.csv.
    Convergence(Common),
    /// Runs with the entropy correction on and off; writes audit.csv.
    Audit(Common),
    /// Recovers edge fluxes from a CSV of element residuals.
    Recover {
        /// CSV with columns element, psi_0, ..., psi_{n-1} (n = 3 or 6).
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Sequential element loops.
    #[arg(long)]
    deterministic: bool,
    /// Also write per-element entropy defects to entropy_dump.csv.
    #[arg(long)]
    dump_entropy: bool,
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    let (common, f): (Common, fn(&config::RunConfig, &Options) -> Result<(), CliError>) = match cmd {
        Command::Recover { input, out } => return commands::recover(&input, &out),
        Command::Run(c) => (c, commands::run),
        Command::Convergence(c) => (c, commands::convergence),
        Command::Audit(c) => (c, commands::audit),
    };
    let cfg = commands::load_config(&common.config)?;
    let opts = Options {
        out: common.out,
        exec: if common.deterministic {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        dump_entropy: common.dump_entropy,
    };
    f(&cfg, &opts)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
