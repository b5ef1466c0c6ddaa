mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand, ValueEnum};
use ellmom_core::identities::catalog::SUITES;
use ellmom_core::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// High-precision moments of complete elliptic integrals and identity checks.
#[derive(Debug, Parser)]
#[command(name = "ellmom", version)]
pub struct Cli {
    /// Decimal digits of the result (at least 15; default 50, 60 for `conjectures`).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(15..))]
    pub digits: Option<u32>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    /// Identity catalog to use instead of the built-in one.
    #[arg(long, global = true, env = "ELLMOM_CATALOG")]
    pub catalog: Option<PathBuf>,

    /// Refinement limit of the quadrature (default 12).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(3..=20))]
    pub max_level: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// A moment ∫₀¹ xⁿ x'ᵐ P(x) dx: closed form, quadrature and their difference.
    Moment {
        /// Product of K, E, Kc, Ec with optional powers, e.g. "K Kc" or "Kc^2".
        product: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        n: String,
        /// Power of x' = sqrt(1 - x²).
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        m: String,
    },
    /// Checks catalog identities against quadrature.
    Verify {
        #[arg(long, default_value = "all", value_parser = PossibleValuesParser::new(SUITES))]
        suite: String,
        /// Only these identity ids (repeatable).
        #[arg(long = "id")]
        ids: Vec<String>,
        /// Adds wall-clock seconds to each report.
        #[arg(long)]
        timings: bool,
    },
    /// Numeric probes of the two open conjectures.
    Conjectures {
        #[arg(long)]
        timings: bool,
    },
    /// Integer relation search over the values in a file (one decimal per line).
    Pslq {
        file: PathBuf,
        /// Coefficient bound 2^bits (default: the largest up to 20 the precision allows).
        #[arg(long)]
        bits: Option<u32>,
        /// Search digits (default: half the digits given in the file).
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Generalized hypergeometric series, e.g. "3F2(1/2,1/2,1/2;1,1;1)".
    Hyper { spec: String },
    /// Sine-series coefficients of K(sin t) or E(sin t) against quadrature.
    Fourier {
        /// K or E
        kind: String,
        n: u64,
    },
    /// Double-precision triple integrals over the unit cube against the 1D moments.
    Zudilin3d,
}

/// Failure of a command, with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Failed(String),
    /// Output already printed; exit with status 1.
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Catalog(_) | Error::InsufficientPrecision { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Failed(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .expect("thread pool configured once");
    }
    if let Some(level) = cli.max_level {
        ellmom_core::quad::set_default_max_level(level as usize);
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
