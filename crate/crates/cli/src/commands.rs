use std::fmt::Write as _;

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::{json, Value};

use qdiv_core::divergence::{DivergenceReport, DivergenceValue};
use qdiv_core::entanglement::{emax, BipartiteState, EmaxConfig, EmaxResult};
use qdiv_core::io::{parse_operator_file, parse_state_file, ChannelFile, OperatorFile, StateFile};
use qdiv_core::operator::random::{random_channel_with, random_density_with, seeded};
use qdiv_core::operator::{DensityOperator, HermitianOperator};
use qdiv_core::smoothing::{smooth_dmax_exact, smooth_dmax_upper, smooth_dmin_exact_classical, smooth_dmin_lower};
use qdiv_core::spectral::{rate_curve_with, IidPair, RatePoint, SpectralPath};

use crate::suite::{lemma_names, run_suite, SuiteConfig, SuiteReport, DEFAULT_DIMS};
use crate::{
    Cli, Command, ConvergeArgs, EmaxArgs, Format, GenKind, PairArgs, PathArg, Quantity, SmoothArgs, SmoothMode,
    SuiteArgs, EXIT_NON_CONVERGENCE, EXIT_OK, EXIT_SUITE_FAILURE, EXIT_VALIDATION,
};

/// Rendered output of a subcommand and the exit code it asks for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: EXIT_OK }
    }
}

/// Exit code for an error: 2 for solver non-convergence or a failed certificate, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    fn core(e: &qdiv_core::Error) -> i32 {
        match e {
            qdiv_core::Error::NonConvergence { .. } | qdiv_core::Error::Certificate(_) => EXIT_NON_CONVERGENCE,
            qdiv_core::Error::File { source, .. } => core(source),
            _ => EXIT_VALIDATION,
        }
    }
    err.chain()
        .find_map(|c| c.downcast_ref::<qdiv_core::Error>())
        .map_or(EXIT_VALIDATION, core)
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    if cli.tolerance.is_some() && !matches!(cli.command, Command::Suite(_)) {
        bail!("--tolerance only applies to `suite`");
    }
    let format = cli.format.unwrap_or(match cli.command {
        Command::Converge(_) => Format::Csv,
        _ => Format::Json,
    });
    match &cli.command {
        Command::Compute(args) => compute(args, format).map(Outcome::ok),
        Command::Smooth(args) => smooth(args, format).map(Outcome::ok),
        Command::Emax(args) => run_emax(args, cli.seed, format).map(Outcome::ok),
        Command::Converge(args) => converge(args, format).map(Outcome::ok),
        Command::Suite(args) => suite(args, cli.seed, cli.tolerance, format),
        Command::Gen(args) => generate(&args.kind, cli.seed, format).map(Outcome::ok),
    }
}

fn to_json<S: Serialize>(value: &S) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Nine significant digits; `inf` for an infinite divergence.
fn sig9(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn bits_cell(v: &DivergenceValue<f64>) -> String {
    sig9(v.as_f64())
}

/// `key,value` rows for the scalar fields of a flat report.
fn key_value_csv(rows: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

fn load_rho(path: &std::path::Path) -> anyhow::Result<DensityOperator<f64>> {
    Ok(parse_state_file::<f64>(path)
        .with_context(|| format!("reading rho from {}", path.display()))?
        .density()
        .clone())
}

fn load_sigma(path: &std::path::Path) -> anyhow::Result<HermitianOperator<f64>> {
    Ok(parse_operator_file::<f64>(path)
        .with_context(|| format!("reading sigma from {}", path.display()))?
        .0)
}

fn load_sigma_state(path: &std::path::Path) -> anyhow::Result<DensityOperator<f64>> {
    load_rho(path).with_context(|| "sigma must be a normalized state here")
}

fn compute(args: &PairArgs, format: Format) -> anyhow::Result<String> {
    let rho = load_rho(&args.rho)?;
    let sigma = load_sigma(&args.sigma)?;
    let report = DivergenceReport::evaluate(&rho, &sigma)?;
    match format {
        Format::Json => to_json(&report),
        Format::Csv => Ok(key_value_csv(&[
            ("d_min_bits", bits_cell(&report.d_min)),
            ("d_max_bits", bits_cell(&report.d_max)),
            ("rel_entropy_bits", bits_cell(&report.rel_entropy)),
            ("chernoff_bits", bits_cell(&report.chernoff)),
            ("sandwich_ok", report.sandwich_ok.to_string()),
        ])),
    }
}

/// Probability vectors of a commuting pair in a common eigenbasis.
fn classical_pair(rho: &DensityOperator<f64>, sigma: &HermitianOperator<f64>) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    if rho.is_diagonal() && sigma.is_diagonal() {
        return Ok((rho.diagonal(), sigma.diagonal()));
    }
    let sigma = DensityOperator::new(sigma.clone())
        .context("exact D_min smoothing of a non-diagonal pair needs a state sigma")?;
    let pair = IidPair::new(rho.clone(), sigma)?;
    match pair.joint_spectrum() {
        Some((p, q)) => Ok((p.to_vec(), q.to_vec())),
        None => bail!("exact D_min smoothing needs commuting rho and sigma; use --mode bound"),
    }
}

fn smooth(args: &SmoothArgs, format: Format) -> anyhow::Result<String> {
    if !(args.eps.is_finite() && args.eps >= 0.0) {
        bail!("--eps must be a non-negative number, got {}", args.eps);
    }
    let rho = load_rho(&args.pair.rho)?;
    let sigma = load_sigma(&args.pair.sigma)?;
    let eps = args.eps;
    let (value, rows): (Value, Vec<(&str, String)>) = match (args.quantity, args.mode) {
        (Quantity::Dmax, SmoothMode::Exact) => {
            let r = smooth_dmax_exact(&rho, &sigma, eps)?;
            (
                json!({
                    "quantity": "dmax", "mode": "exact", "eps": eps,
                    "value_bits": r.value_bits, "lower_bits": r.lower_bits,
                    "witness": OperatorFile::from_operator(&r.witness, None),
                }),
                vec![("value_bits", sig9(r.value_bits)), ("lower_bits", sig9(r.lower_bits))],
            )
        }
        (Quantity::Dmax, SmoothMode::Bound) => {
            let r = smooth_dmax_upper(&rho, &sigma, eps)?;
            let c = &r.certificate;
            (
                json!({
                    "quantity": "dmax", "mode": "bound", "eps": eps,
                    "value_bits": r.lambda_bits, "floor_hit": r.floor_hit,
                    "certificate": {
                        "lambda_bits": c.lambda_bits,
                        "epsilon_used": c.epsilon_used,
                        "transform_trace_dist": c.transform_trace_dist,
                        "smoothed": OperatorFile::from_operator(&c.smoothed, None),
                    },
                }),
                vec![
                    ("value_bits", sig9(r.lambda_bits)),
                    ("epsilon_used", sig9(c.epsilon_used)),
                    ("transform_trace_dist", sig9(c.transform_trace_dist)),
                ],
            )
        }
        (Quantity::Dmin, SmoothMode::Exact) => {
            let (p, q) = classical_pair(&rho, &sigma)?;
            let v = smooth_dmin_exact_classical(&p, &q, eps)?;
            (
                json!({"quantity": "dmin", "mode": "exact", "eps": eps, "value": v}),
                vec![("value_bits", bits_cell(&v))],
            )
        }
        (Quantity::Dmin, SmoothMode::Bound) => {
            let r = smooth_dmin_lower(&rho, &sigma, eps)?;
            (
                json!({
                    "quantity": "dmin", "mode": "bound", "eps": eps,
                    "value": r.value, "gamma_bits": r.gamma_bits, "delta": r.delta,
                }),
                vec![
                    ("value_bits", bits_cell(&r.value)),
                    ("gamma_bits", r.gamma_bits.map_or_else(String::new, sig9)),
                    ("delta", sig9(r.delta)),
                ],
            )
        }
    };
    match format {
        Format::Json => to_json(&value),
        Format::Csv => Ok(key_value_csv(&rows)),
    }
}

fn run_emax(args: &EmaxArgs, seed: u64, format: Format) -> anyhow::Result<String> {
    let parsed = parse_state_file::<f64>(&args.state).with_context(|| format!("reading {}", args.state.display()))?;
    let state = match (&parsed, args.dims) {
        (StateFile::Bipartite(b), None) => b.clone(),
        (StateFile::Bipartite(b), Some(d)) if d == b.dims() => b.clone(),
        (StateFile::Bipartite(b), Some(d)) => bail!("--dims {d:?} contradicts the file's dims {:?}", b.dims()),
        (StateFile::Single(rho), Some(d)) => BipartiteState::new(rho.clone(), d)?,
        (StateFile::Single(_), None) => bail!("the state file has no `dims`; pass --dims dA,dB"),
    };
    let mut config = EmaxConfig::for_dims(state.dims());
    config.seed = seed;
    if let Some(r) = args.restarts {
        config.restarts = r;
    }
    if let Some(t) = args.terms {
        config.terms = t;
    }
    if let Some(i) = args.iters {
        config.iters = i;
    }
    let result: EmaxResult<f64> = emax(&state, &config)?;
    match format {
        Format::Json => to_json(&result),
        Format::Csv => Ok(key_value_csv(&[
            ("upper_bits", sig9(result.upper_bits)),
            ("lower_bits", sig9(result.lower_bits)),
            ("gap", sig9(result.gap)),
            ("barrier_weight", sig9(result.barrier_weight)),
            ("ppt_certified", result.ppt_certified.to_string()),
            ("witness_terms", result.witness.len().to_string()),
        ])),
    }
}

pub const RATE_CSV_HEADER: &str = "n,eps,dmax_over_n,dmin_over_n,rel_entropy";

pub fn rate_csv(points: &[RatePoint<f64>]) -> String {
    let mut out = format!("{RATE_CSV_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.n,
            sig9(p.eps),
            sig9(p.dmax_over_n),
            sig9(p.dmin_over_n),
            sig9(p.rel_entropy)
        );
    }
    out
}

fn converge(args: &ConvergeArgs, format: Format) -> anyhow::Result<String> {
    if args.nmax == 0 {
        bail!("--nmax must be at least 1");
    }
    let rho = load_rho(&args.pair.rho)?;
    let sigma = load_sigma_state(&args.pair.sigma)?;
    let pair = IidPair::new(rho, sigma)?;
    let path = match args.path {
        PathArg::Auto => SpectralPath::Auto,
        PathArg::Dense => SpectralPath::Dense,
        PathArg::Classical => SpectralPath::Classical,
    };
    let ns: Vec<usize> = (1..=args.nmax).collect();
    let points = rate_curve_with(&pair, args.eps, &ns, path)?;
    match format {
        Format::Json => to_json(&points),
        Format::Csv => Ok(rate_csv(&points)),
    }
}

pub fn suite_csv(report: &SuiteReport) -> String {
    let mut out = String::from("name,trials,failures,errors,tolerance,worst_violation\n");
    for l in &report.lemmas {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            l.name,
            l.trials,
            l.failures,
            l.errors,
            sig9(l.tolerance),
            l.worst_violation.map_or_else(String::new, sig9)
        );
    }
    out
}

fn suite(args: &SuiteArgs, seed: u64, tolerance: Option<f64>, format: Format) -> anyhow::Result<Outcome> {
    if args.list {
        let mut text = lemma_names().join("\n");
        text.push('\n');
        return Ok(Outcome::ok(text));
    }
    let config = SuiteConfig {
        seed,
        trials: args.trials,
        dims: args.dims.clone().unwrap_or_else(|| DEFAULT_DIMS.to_vec()),
        tolerances: args.lemma_tolerance.iter().cloned().collect(),
        global_tolerance: tolerance,
        threads: args.threads,
        filter: args.filter.clone(),
    };
    let report = run_suite(&config).map_err(anyhow::Error::msg)?;
    let text = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => suite_csv(&report),
    };
    Ok(Outcome {
        text,
        code: if report.pass { EXIT_OK } else { EXIT_SUITE_FAILURE },
    })
}

/// Stream ids keep the generated objects of different kinds independent.
const GEN_STATE_STREAM: u64 = 0x5354;
const GEN_BIPARTITE_STREAM: u64 = 0x4250;
const GEN_CHANNEL_STREAM: u64 = 0x4348;

fn generate(kind: &GenKind, seed: u64, format: Format) -> anyhow::Result<String> {
    if format == Format::Csv {
        bail!("`gen` writes JSON operator files only");
    }
    let check_rank = |rank: Option<usize>, dim: usize| -> anyhow::Result<usize> {
        let r = rank.unwrap_or(dim);
        if r == 0 || r > dim {
            bail!("--rank must lie in 1..={dim}, got {r}");
        }
        Ok(r)
    };
    let mut text = match *kind {
        GenKind::State { dim, rank } => {
            if dim == 0 {
                bail!("--dim must be at least 1");
            }
            let rank = check_rank(rank, dim)?;
            let rho = random_density_with::<f64, _>(dim, rank, &mut seeded(seed, GEN_STATE_STREAM))?;
            OperatorFile::from_operator(&rho, None).to_json()
        }
        GenKind::Bipartite { dims, rank } => {
            let dim = dims.0 * dims.1;
            if dims.0 == 0 || dims.1 == 0 {
                bail!("local dimensions must be positive");
            }
            let rank = check_rank(rank, dim)?;
            let rho = random_density_with::<f64, _>(dim, rank, &mut seeded(seed, GEN_BIPARTITE_STREAM))?;
            OperatorFile::from_operator(&rho, Some(dims)).to_json()
        }
        GenKind::Channel {
            in_dim,
            out_dim,
            env_dim,
        } => {
            if in_dim == 0 || out_dim == 0 || env_dim == 0 {
                bail!("channel dimensions must be positive");
            }
            let ch = random_channel_with::<f64, _>(in_dim, out_dim, env_dim, &mut seeded(seed, GEN_CHANNEL_STREAM))?;
            serde_json::to_string_pretty(&ChannelFile::from_channel(&ch))?
        }
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.1887218755408671), "1.88721876e-1");
        assert_eq!(sig9(-2.0), "-2.00000000e0");
        assert_eq!(sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        let nc = anyhow::Error::new(qdiv_core::Error::NonConvergence {
            iterations: 3,
            residual: 1.0,
        });
        assert_eq!(exit_code(&nc), EXIT_NON_CONVERGENCE);
        assert_eq!(exit_code(&nc.context("while smoothing")), EXIT_NON_CONVERGENCE);
        let bad = anyhow::Error::new(qdiv_core::Error::InvalidTrace { trace: 1.5 });
        assert_eq!(exit_code(&bad), EXIT_VALIDATION);
        let wrapped = qdiv_core::Error::File {
            path: "x.json".into(),
            source: Box::new(qdiv_core::Error::Certificate("bad".into())),
        };
        assert_eq!(exit_code(&anyhow::Error::new(wrapped)), EXIT_NON_CONVERGENCE);
        assert_eq!(exit_code(&anyhow::anyhow!("plain")), EXIT_VALIDATION);
    }
}
