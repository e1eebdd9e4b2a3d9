//! `bvdet`: batch front end over `bvdet-core`. Every subcommand prints a
//! JSON report (or writes it to `--out`) and exits 0 when all checks pass,
//! 1 when a check fails and 2 on malformed input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CliError, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotFormat {
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "bvdet", version, about = "Pfaffians, BV observables, perturbation and determinant line bundles")]
pub struct Cli {
    /// Scalar arithmetic for the algebraic commands.
    #[arg(long, value_enum, global = true, default_value = "exact")]
    pub mode: Mode,
    /// Tolerance for numeric comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed of the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pfaffian of a skew matrix.
    Pfaffian {
        /// Matrix as JSON rows, inline or as a file path.
        #[arg(long)]
        matrix: String,
    },
    /// Cohomology of the truncated observables of a skew form, and its retractions.
    BvCohomology {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        truncation: usize,
    },
    /// Perturbs a retraction and verifies the result.
    HplCheck {
        /// JSON with `retraction` and optional `perturbation`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Determinant line bundle of an operator family.
    DetBundle {
        #[arg(long)]
        family: PathBuf,
        /// Also write (θ, Re s, Im s, σ_min) rows to `--out` with a `.csv` extension.
        #[arg(long, value_enum)]
        emit_plot: Option<PlotFormat>,
    },
    /// Runs the full acceptance suite.
    VerifyAll,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli).and_then(|o| emit(&cli, &o).map(|()| o)) {
        Ok(Outcome { passed: true, .. }) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("bvdet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&outcome.report).map_err(|e| CliError::Check(e.to_string()))? + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Check(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
