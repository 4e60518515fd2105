//! `besselhr`: evaluation, coefficient tables, kernels, Hankel transforms and
//! cross-method verification suites on the command line.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 numeric failure.

mod args;
mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Usage(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<besselhr::Error> for Failure {
    fn from(e: besselhr::Error) -> Self {
        match e {
            besselhr::Error::Invalid(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "besselhr", version, about = "Fundamental Bessel functions of arbitrary rank")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate J(x;ς,λ) on a grid.
    Eval(commands::EvalArgs),
    /// Dump coefficient tables (B_m(λ;ξ), A_{j,m}, U and V).
    Coeffs(commands::CoeffsArgs),
    /// Evaluate the Bessel kernel J_(λ,δ)(±x) on a grid.
    Kernel(commands::KernelArgs),
    /// Hankel transform of a weight function, or its functional-equation check.
    Transform(commands::TransformArgs),
    /// Run a verification suite and emit a JSON report.
    Verify(verify::VerifyArgs),
    /// Cross-method comparisons.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Evaluate with several methods and tabulate the pairwise discrepancies.
    Compare(commands::CompareArgs),
}

/// Shared output flags.
#[derive(clap::Args, Clone, Debug, serde::Serialize)]
pub struct OutArgs {
    /// Output file; standard output if absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("BESSELHR_THREADS") {
        let k: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| Failure::Usage(format!("BESSELHR_THREADS must be a positive integer, got {v:?}")))?;
        b = b.num_threads(k);
    }
    b.build().map_err(|e| Failure::Usage(format!("cannot start worker threads: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let pool = thread_pool()?;
    pool.install(|| match cli.command {
        Command::Eval(a) => commands::eval(a),
        Command::Coeffs(a) => commands::coeffs(a),
        Command::Kernel(a) => commands::kernel(a),
        Command::Transform(a) => commands::transform(a),
        Command::Verify(a) => verify::run(a),
        Command::Oracle(OracleCommand::Compare(a)) => commands::compare(a),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("besselhr: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
