//! Command-line harness for seeded, reproducible phase-synchronization
//! experiments.

mod commands;
mod record;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "phasync",
    version,
    about = "Phase synchronization experiments: Monte Carlo risk sweeps, convergence traces, lower-bound evaluation, oracle cross-checks"
)]
struct Cli {
    /// Worker threads (default: all cores; env fallback PHASYNC_THREADS).
    /// Results are independent of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo risk experiment over a (n, p, sigma) grid.
    Simulate(SimulateArgs),
    /// Per-iteration loss trajectory of one instance.
    Convergence(ConvergenceArgs),
    /// Numerical minimax lower bound report.
    Lowerbound(LowerboundArgs),
    /// Oracle-vs-fast-path cross checks.
    OracleCheck(OracleCheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Method {
    Spectral,
    Gpm,
    Mle,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Gpm => "gpm",
            Method::Mle => "mle",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    /// Problem sizes (comma list sweeps the grid).
    #[arg(long, value_delimiter = ',', default_value = "100")]
    n: Vec<usize>,
    /// Observation probabilities (comma list).
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    p: Vec<f64>,
    /// Noise levels (comma list).
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    sigma: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Base seed; trial seeds derive from (seed, grid index, trial index).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimators to run (comma list).
    #[arg(long, value_delimiter = ',', default_value = "mle")]
    method: Vec<Method>,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Fixed-point tolerance on ||f(z) - z||_inf.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Output path (default stdout).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct LowerboundArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Quadrature nodes per axis.
    #[arg(long, default_value_t = 400)]
    quad_points: usize,
    /// Central-difference step for the prior-information term.
    #[arg(long, default_value_t = 1e-5)]
    fd_step: f64,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// Subset of checks to run: grid, jacobi, fisher.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CI fault injection: corrupts one sign inside the iteration step so
    /// the grid cross-check must fail.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) {
    let threads = threads.or_else(|| {
        std::env::var("PHASYNC_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: Option<usize>) {
    if threads.is_some() || std::env::var("PHASYNC_THREADS").is_ok() {
        eprintln!("note: built without the `parallel` feature; --threads is ignored");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let outcome = match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Convergence(args) => commands::convergence(&args),
        Command::Lowerbound(args) => commands::lowerbound(&args),
        Command::OracleCheck(args) => commands::oracle_check(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
