use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{ExperimentConfig, Overrides};

/// Numerical checks for Dirac operators on the noncommutative 3-torus viewed
/// as a U(1) bundle over the 2-torus.
#[derive(Parser)]
#[command(name = "torus-bundle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Reality, grading, first order, equivariance and projectability residuals.
    VerifyAxioms,
    /// Split D into horizontal, vertical and zero-order parts.
    Decompose,
    /// Fibre spectra and the fibre relation.
    Spectrum,
    /// Twisted Dirac scan over connection coefficients.
    ConnectionScan,
    /// Spectral residue estimates.
    NcIntegral,
    /// Canonical map witnesses, injectivity and kernel images.
    HopfGalois,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::VerifyAxioms => "verify-axioms",
            Command::Decompose => "decompose",
            Command::Spectrum => "spectrum",
            Command::ConnectionScan => "connection-scan",
            Command::NcIntegral => "nc-integral",
            Command::HopfGalois => "hopf-galois",
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<commands::Outcome> {
    let cfg = ExperimentConfig::resolve(&cli.overrides, cli.command.name())?;
    let out = match cli.command {
        Command::VerifyAxioms => commands::verify_axioms(&cfg),
        Command::Decompose => commands::decompose_cmd(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::ConnectionScan => commands::connection_scan(&cfg),
        Command::NcIntegral => commands::nc_integral(&cfg),
        Command::HopfGalois => commands::hopf_galois(&cfg),
    }?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &out.body)?,
        None => std::io::stdout().lock().write_all(out.body.as_bytes())?,
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) if out.pass => ExitCode::SUCCESS,
        Ok(out) => {
            for f in &out.failures {
                eprintln!("FAIL {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
