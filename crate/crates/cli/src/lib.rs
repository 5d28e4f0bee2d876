//! Command-line front end for `ris-sim`: scenario files in, codebooks,
//! maps and images out.

pub mod commands;
pub mod error;
pub mod scenario;
pub mod spacetime;

use clap::{Parser, Subcommand};

pub use crate::error::CliError;

/// Simulate and optimize links assisted by reconfigurable surfaces.
#[derive(Debug, Parser)]
#[command(name = "ris", version)]
pub struct Cli {
    /// Worker threads; defaults to one per core. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Focus every panel on the receiver and write the codebooks.
    Optimize(commands::OptimizeArgs),
    /// Received-power map over a horizontal grid.
    Coverage(commands::CoverageArgs),
    /// Image the scenario's space of interest with focused codebooks.
    Image(commands::ImageArgs),
    /// Harmonic coefficients and scattering pattern of a time-coded panel.
    Spacetime(spacetime::SpacetimeArgs),
}

/// Execute a parsed command line inside a pool of `--threads` workers.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::input("usage", "--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::infeasible("threads", e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Optimize(a) => commands::optimize(&a),
        Command::Coverage(a) => commands::coverage(&a),
        Command::Image(a) => commands::image(&a),
        Command::Spacetime(a) => spacetime::run(&a),
    })
}
