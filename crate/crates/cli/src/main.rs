//! `pseudomode` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 numerical
//! failure (a tolerance was not met).

mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pseudomode", version, about = "Exact and approximate reduced dynamics for Lorentzian reservoirs")]
pub struct Cli {
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output format; commands writing several artifacts then write only this one.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Exact,
    Born,
    Redfield,
    Gksl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairName {
    ExactBorn,
    ExactGksl,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decay rates of every method as JSON.
    Rates {
        #[arg(long)]
        config: PathBuf,
        /// Times at which the non-Markovian Redfield rates are tabulated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        at: Vec<f64>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time series of the reduced state (global basis, interaction picture).
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodName,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Region map of the population-rate orderings, with SVG and a
    /// predicate discrepancy summary next to the CSV.
    Classify {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "regions.csv")]
        out: PathBuf,
    },
    /// Cells where an approximate population rate is within a relative
    /// tolerance of the exact one.
    Closeness {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0.15)]
        tolerance: f64,
        #[arg(long, value_enum, default_value = "both")]
        pair: PairName,
        #[arg(long, default_value = "closeness.csv")]
        out: PathBuf,
    },
    /// Brute-force oracle comparisons and the triple-point check.
    Verify {
        /// Model to test (default: a built-in two-level model).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bath modes per level.
        #[arg(long, default_value_t = 2000)]
        modes: usize,
        /// Bath half-width in units of gamma.
        #[arg(long, default_value_t = 40.0)]
        half_width: f64,
        /// Comparison window (default: 5/gamma).
        #[arg(long)]
        t_max: Option<f64>,
        /// Memory-kernel quadrature step (default: 1e-3/gamma).
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The two points where exact, Born and GKSL population rates coincide.
    TriplePoint {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Points along dE/g and gamma/g, each in 2..=2000.
    #[arg(long, default_value = "61x80", value_parser = parse_grid)]
    pub grid: (usize, usize),
    /// Inclusive dE/g range.
    #[arg(long, default_value = "-3:3", value_parser = parse_range, allow_hyphen_values = true)]
    pub de_range: (f64, f64),
    /// gamma/g range, left end excluded.
    #[arg(long, default_value = "0:8", value_parser = parse_range, allow_hyphen_values = true)]
    pub gamma_range: (f64, f64),
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got '{s}'"))?;
    let n = a.trim().parse().map_err(|e| format!("bad grid size '{a}': {e}"))?;
    let m = b.trim().parse().map_err(|e| format!("bad grid size '{b}': {e}"))?;
    Ok((n, m))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got '{s}'"))?;
    let lo = a.trim().parse().map_err(|e| format!("bad range bound '{a}': {e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("bad range bound '{b}': {e}"))?;
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
