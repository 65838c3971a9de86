use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

mod commands;
mod report;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Partial-transpose witnesses, exact projector algebra and distillation
/// protocol simulation.
///
/// JSON reports go to stdout; a readable summary goes to stderr.
/// Rationals are written as `p/q`.
#[derive(Parser, Debug)]
#[command(name = "distill", version)]
struct Cli {
    /// Worker threads for restarts and trials (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify the partial-transpose relations among P, Q, R, S.
    Identities {
        #[arg(long)]
        d: usize,
    },
    /// Exact n-copy coefficients of the partially transposed rho(eps).
    Coeffs {
        #[arg(long)]
        d: usize,
        #[arg(long, value_parser = rational)]
        eps: BigRational,
        #[arg(long)]
        n: u32,
        /// Largest number of words to expand.
        #[arg(long, default_value_t = 4096)]
        max_terms: usize,
    },
    /// Locate the largest eps for which the n-copy bound stays positive.
    Epsilon {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational, default_value = "1/1000000000")]
        precision: BigRational,
    },
    /// Search for a negative Schmidt-rank-2 witness on a named state family.
    Witness(WitnessArgs),
    /// Simulate the iterated filtering protocol.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct WitnessArgs {
    /// State family: werner, rho or alpha-state.
    family: String,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_parser = rational)]
    eps: Option<BigRational>,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Search strategy: alternating or random.
    #[arg(long, default_value = "alternating")]
    method: String,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Write the partially transposed operator as JSON.
    #[arg(long)]
    dump_operator: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// JSON protocol config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_parser = rational)]
    eps: Option<BigRational>,
    #[arg(long, value_parser = rational)]
    target: Option<BigRational>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Write every run as one JSON line.
    #[arg(long)]
    runs: Option<PathBuf>,
}

fn rational(s: &str) -> Result<BigRational, String> {
    distill_core::rational::parse_rational(s).map_err(|e| e.to_string())
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        Failure {
            code: EXIT_CHECK_FAILED,
            message: format!("{context}: {err}"),
        }
    }
}

impl From<distill_core::Error> for Failure {
    fn from(err: distill_core::Error) -> Self {
        use distill_core::Error;
        let code = match &err {
            e if e.is_budget() => EXIT_BUDGET,
            Error::InvalidParameter(_) | Error::UnknownName { .. } => EXIT_USAGE,
            _ => EXIT_CHECK_FAILED,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(workers) = cli.workers {
        if workers == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match cli.command {
        Command::Identities { d } => commands::identities(d),
        Command::Coeffs { d, eps, n, max_terms } => commands::coeffs(d, eps, n, max_terms),
        Command::Epsilon { d, n, precision } => commands::epsilon(d, n, precision),
        Command::Witness(args) => commands::witness(args),
        Command::Simulate(args) => commands::simulate(args),
    };
    match outcome {
        Ok(report) => {
            report.emit();
            if report.pass == Some(false) {
                ExitCode::from(EXIT_CHECK_FAILED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
