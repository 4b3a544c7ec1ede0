//! `toroidal`: eigenvalues, kernels, projections, figure data and the
//! verification suite for the poloidal toroidal-dipole operator.

mod commands;
mod config;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{EigenvaluesArgs, FiguresArgs, KernelArgs, ProjectArgs, VerifyArgs};
use config::GlobalArgs;

/// Invalid input; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

impl From<toroidal::Error> for UsageError {
    fn from(e: toroidal::Error) -> Self {
        Self(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "toroidal", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantized eigenvalues, or the normalized eigenvalue over an aspect-ratio sweep.
    Eigenvalues(EigenvaluesArgs),
    /// Samples of one eigenfunction on [0, 2pi].
    Kernel(KernelArgs),
    /// Brackets of a wavefunction against the eigenfunctions.
    Project(ProjectArgs),
    /// Plot-ready data for the primitives and the eigenvalue curve.
    Figures(FiguresArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

fn is_usage(err: &anyhow::Error) -> bool {
    use toroidal::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return true;
    }
    matches!(
        err.downcast_ref::<E>(),
        Some(
            E::AspectRatio(_)
                | E::Geometry(_)
                | E::Scale(_)
                | E::QuadratureConfig(_)
                | E::Parse { .. }
                | E::Wavefunction(_)
                | E::Argument(_)
        )
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.global.clone().merged().map_err(anyhow::Error::from).and_then(|global| match &cli.command {
        Command::Eigenvalues(a) => commands::eigenvalues(&global, a),
        Command::Kernel(a) => commands::kernel(&global, a),
        Command::Project(a) => commands::project(&global, a),
        Command::Figures(a) => commands::figures(&global, a),
        Command::Verify(a) => commands::verify(&global, a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
