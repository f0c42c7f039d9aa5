//! Command-line front end: spectra, constructions, resolvent-difference
//! studies and quasimode scans over tower-of-squares domains.

mod commands;
mod config;
mod oracle;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

pub const EXIT_OK: u8 = 0;
/// Input or validation problem.
pub const EXIT_INPUT: u8 = 2;
/// Numerical or search failure.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "spectral-tower",
    version,
    about = "Dirichlet Laplacian laboratory for towers of squares joined by small windows"
)]
struct Cli {
    /// Configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base directory for run outputs.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Seed override for every stochastic iteration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenvalues of a discretized tower.
    Spectrum {
        /// Grid spacing override (dyadic, e.g. 1/64).
        #[arg(long)]
        h: Option<String>,
        /// Compare a single-square spectrum against the separable
        /// analytic values.
        #[arg(long)]
        analytic_check: bool,
    },
    /// Grow a tower, searching each window size until all conditions hold.
    Construct {
        /// Initial grid spacing override (dyadic).
        #[arg(long)]
        h: Option<String>,
        /// Resolvent power override for the trace-norm condition.
        #[arg(long)]
        ell: Option<u32>,
        /// Run the uniform-bound verdicts and fail on any false one.
        #[arg(long)]
        verify: bool,
        /// Write `x y value` dumps of the tracked eigenfunction.
        #[arg(long)]
        dump_fields: bool,
        /// Replay a saved trace file and compare eigenvalues.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Resolvent-difference report for the last window of a tower
    /// (open versus closed).
    Resolvent {
        /// Resolvent power override.
        #[arg(long)]
        ell: Option<u32>,
        /// Grid spacing override (dyadic).
        #[arg(long)]
        h: Option<String>,
        /// Cross-check against a dense decomposition (small instances).
        #[arg(long)]
        dense_oracle: bool,
    },
    /// Quasimode residual decay over growing inscribed squares.
    Quasimode {
        /// Spectral target.
        #[arg(long)]
        lambda: Option<f64>,
        /// Wave direction in radians.
        #[arg(long)]
        theta: Option<f64>,
        /// Grid spacing override (dyadic).
        #[arg(long)]
        h: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    // config-parse failures get no run directory or manifest
    let mut cfg = match &cli.config {
        Some(path) => match config::ConfigFile::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
        },
        None => config::ConfigFile::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed.to_string());
    }

    let code = match cli.command {
        Command::Spectrum { h, analytic_check } => {
            commands::spectrum::run(&cli.out, &cfg, h.as_deref(), analytic_check)
        }
        Command::Construct { h, ell, verify, dump_fields, replay } => {
            if let Some(h) = h {
                cfg.set("h0", h);
            }
            if let Some(ell) = ell {
                cfg.set("ell", ell.to_string());
            }
            commands::construct::run(&cli.out, &cfg, verify, dump_fields, replay.as_deref())
        }
        Command::Resolvent { ell, h, dense_oracle } => {
            commands::resolvent::run(&cli.out, &cfg, ell, h.as_deref(), dense_oracle)
        }
        Command::Quasimode { lambda, theta, h } => {
            commands::quasimode::run(&cli.out, &cfg, lambda, theta, h.as_deref())
        }
    };
    ExitCode::from(code)
}
