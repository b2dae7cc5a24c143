//! `groth`: generate instances, solve the relaxation, round it, and run the
//! constant checks. Every command prints one JSON report to stdout and a
//! short summary to stderr.
//!
//! Exit codes: 0 success, 1 error, 2 PSD certification failed, 3 solver did
//! not converge, 4 a verification gate failed.

mod analyze;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use groth_core::matrix::DEFAULT_PSD_TOL;
use serde::Serialize;

use crate::report::Status;

#[derive(Debug, Parser)]
#[command(name = "groth", version, about = "Rank-constrained PSD Grothendieck problem: solve, round, analyze")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "GROTH_SEED", default_value_t = 0)]
    seed: u64,

    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(flatten)]
    tol: Tolerances,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Tolerances {
    /// Relative tolerance of the PSD certificate.
    #[arg(long, global = true, default_value_t = DEFAULT_PSD_TOL)]
    pub tol_psd: f64,
    /// Solver stopping threshold on the relative objective gain.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_solver: f64,
    /// Statistical gates allow this many standard errors.
    #[arg(long, global = true, default_value_t = 4.0)]
    pub tol_sigma: f64,
    /// Smallest coefficient accepted as nonnegative.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_coef: f64,
    /// Allowed disagreement between closed forms and quadrature.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_quad: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a test matrix.
    Gen(GenArgs),
    /// Solve the relaxation.
    Solve(SolveArgs),
    /// Round a relaxation solution to rank n.
    Round(RoundArgs),
    /// Constants, curves and positive-type checks.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Laplacian,
    Gram,
    Ones,
    Identity,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub m: usize,
    /// Rank of a gram matrix (default m).
    #[arg(long)]
    pub r: Option<usize>,
    /// Edge list `i j w` (0-based) for a laplacian; the m-cycle if omitted.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// mm or csv; inferred from the extension if omitted.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Embedding dimension (default min(m, ⌈√(2m)⌉+1)).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MatrixArgs {
    pub matrix: PathBuf,
    /// mm or csv; inferred from the extension if omitted.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub skip_psd_check: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: MatrixArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the solution vectors as CSV, one vector per row.
    #[arg(long)]
    pub dump_gram: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RoundArgs {
    #[command(flatten)]
    pub input: MatrixArgs,
    /// Relaxation vectors as CSV; solved inline if omitted.
    #[arg(long)]
    pub gram: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Target rank.
    #[arg(long)]
    pub n: usize,
    /// Roundings for the best-of-R solution.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Roundings for the Monte Carlo ratio estimate.
    #[arg(long, default_value_t = 10_000)]
    pub mc: usize,
}

pub struct Context {
    pub seed: u64,
    pub tol: Tolerances,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    let ctx = Context { seed: cli.seed, tol: cli.tol };
    match cli.command {
        Command::Gen(args) => commands::gen(&ctx, &args),
        Command::Solve(args) => commands::solve(&ctx, &args),
        Command::Round(args) => commands::round(&ctx, &args),
        Command::Analyze(cmd) => analyze::run(&ctx, &cmd),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
