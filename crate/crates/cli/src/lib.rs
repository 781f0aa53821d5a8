//! `qdiv` command-line front end: argument types, command implementations and
//! the seeded property-suite runner.

pub mod commands;
pub mod suite;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{exit_code, run, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_SUITE_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qdiv",
    version,
    about = "Min- and max-relative entropies, smoothing, E_max and spectral rates (all values in bits)"
)]
pub struct Cli {
    /// Seed for every random choice made by the subcommand.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Pass/fail tolerance for every suite check (suite only).
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Output format; `converge` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// D_min, D_max, relative entropy and Chernoff bound of a pair.
    Compute(PairArgs),
    /// Smoothed D_max or D_min.
    Smooth(SmoothArgs),
    /// Two-sided estimate of the max-relative entropy of entanglement.
    Emax(EmaxArgs),
    /// Finite-n rate curve D^ε(ρ^⊗n‖σ^⊗n)/n for n = 1..nmax.
    Converge(ConvergeArgs),
    /// Randomized checks of every invariant.
    Suite(SuiteArgs),
    /// Random state, bipartite state or channel file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// State file for ρ.
    #[arg(long)]
    pub rho: PathBuf,
    /// Operator file for σ (positive; a state where the quantity needs one).
    #[arg(long)]
    pub sigma: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Dmax,
    Dmin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SmoothMode {
    /// Bisection with feasibility certificates (D_max), or exact classical optimum (D_min, commuting pairs).
    Exact,
    /// Projector-based bound with its certificate.
    Bound,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = SmoothMode::Exact)]
    pub mode: SmoothMode,
}

#[derive(Debug, Args)]
pub struct EmaxArgs {
    /// Bipartite state file (or a plain state together with --dims).
    #[arg(long)]
    pub state: PathBuf,
    /// Local dimensions `dA,dB`.
    #[arg(long, value_parser = parse_pair)]
    pub dims: Option<(usize, usize)>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Terms of the fallback ensemble search (default (dA·dB)²).
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Auto,
    Dense,
    Classical,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, default_value_t = qdiv_core::spectral::DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long)]
    pub nmax: usize,
    /// Evaluation path; `auto` uses type classes for commuting pairs.
    #[arg(long, value_enum, default_value_t = PathArg::Auto)]
    pub path: PathArg,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Dimensions for single-system checks, e.g. `2,3,4,5,6`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Tolerance for one check, `NAME=TOL`; may be repeated.
    #[arg(long = "lemma-tolerance", value_parser = parse_override)]
    pub lemma_tolerance: Vec<(String, f64)>,
    /// Worker threads (the report does not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run only the checks whose name contains this string.
    #[arg(long)]
    pub filter: Option<String>,
    /// List the check names and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Random density operator `GG†/Tr GG†`.
    State {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Random bipartite state carrying its local dimensions.
    Bipartite {
        #[arg(long, value_parser = parse_pair)]
        dims: (usize, usize),
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Random channel from a Haar isometry followed by a partial trace.
    Channel {
        #[arg(long)]
        in_dim: usize,
        #[arg(long)]
        out_dim: usize,
        #[arg(long, default_value_t = 2)]
        env_dim: usize,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `dA,dB`, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, tol) = s
        .split_once('=')
        .ok_or_else(|| format!("expected `NAME=TOL`, got `{s}`"))?;
    let tol = tol.trim().parse::<f64>().map_err(|e| format!("`{tol}`: {e}"))?;
    Ok((name.trim().to_string(), tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pair("2,3"), Ok((2, 3)));
        assert_eq!(parse_pair(" 2 , 2 "), Ok((2, 2)));
        assert!(parse_pair("2x3").is_err());
        assert!(parse_pair("2,b").is_err());
    }

    #[test]
    fn override_parsing() {
        assert_eq!(
            parse_override("op_fidelity_chain=1e-6"),
            Ok(("op_fidelity_chain".into(), 1e-6))
        );
        assert!(parse_override("op_fidelity_chain").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
