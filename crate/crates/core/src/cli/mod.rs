//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input or unreadable/corrupt files,
//! 3 contract violation, 4 executor output differs from the oracle.

mod bench;
mod exec;
mod io;
mod prune;
mod report;
mod verify;

use std::fmt;

use clap::{Parser, Subcommand};
use tilewise::Error;

#[derive(Debug, Parser)]
#[command(
    name = "tilewise",
    version,
    about = "Tile-wise sparsity: prune, encode, execute, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prune weight matrices and write plans, masked weights and encodings.
    Prune(prune::Args),
    /// Multiply activations by a CTO-encoded matrix.
    Exec(exec::Args),
    /// Check every executor path against the masked-dense product.
    Verify(verify::Args),
    /// Sparsity, FLOP and memory report for a plan.
    Report(report::Args),
    /// Time pruning patterns over a grid of sizes and sparsities.
    Bench(bench::Args),
}

#[derive(Debug)]
pub enum Failure {
    Tool(Error),
    Mismatch(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Tool(Error::ContractViolation(_)) => 3,
            Failure::Tool(_) => 2,
            Failure::Mismatch(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Tool(e) => write!(f, "{e}"),
            Failure::Mismatch(m) => write!(f, "oracle mismatch: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Tool(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Tool(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Tool(e.into())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Tool(Error::InvalidInput(format!("csv: {e}")))
    }
}

pub fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Tool(Error::InvalidInput(msg.into()))
}

pub type CliResult<T> = std::result::Result<T, Failure>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Prune(a) => prune::run(a),
        Command::Exec(a) => exec::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Report(a) => report::run(a),
        Command::Bench(a) => bench::run(a),
    }
}
