//! Seeded randomized checks of every invariant of the core library.
//!
//! Each lemma owns a list of trials; trial `t` of the lemma at position `k`
//! (in name order) draws from stream `(k << 32) | t` of the configured seed,
//! so results do not depend on scheduling or on which other lemmas run.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Serialize, Serializer};

use qdiv_core::divergence::{
    chernoff_bound, d_max, d_max_forms, d_min, relative_entropy, renyi_relative, DivergenceValue,
};
use qdiv_core::entanglement::{
    emax, monotone_condition_suite, ppt_emax_lower, rel_ent_entanglement, BipartiteState, EmaxConfig, SeparableEnsemble,
};
use qdiv_core::operator::random::{
    random_channel_with, random_contraction_with, random_density_with, random_hermitian, random_positive_with,
    random_pure_vector_with, random_simplex_with, random_unitary_with, seeded, SeededRng,
};
use qdiv_core::operator::{
    compare_projector, fidelity, sqrt_psd, support_projector, trace_distance, DensityOperator, HermitianOperator,
    QuantumChannel, Relation,
};
use qdiv_core::smoothing::{gentle_epsilon, lemma5_smooth, smooth_dmax_exact, smooth_dmax_upper, smooth_dmin_lower};
use qdiv_core::spectral::{
    lemma2_bound_check_with, rate_curve_with, spectral_trace_with, tensor_power, IidPair, SpectralPath,
};
use qdiv_core::Result;
use rand::Rng;

/// Default block dimensions for single-system checks.
pub const DEFAULT_DIMS: [usize; 5] = [2, 3, 4, 5, 6];
/// Bipartite shapes used by the entanglement checks.
pub const BIPARTITE_DIMS: [(usize, usize); 2] = [(2, 2), (2, 3)];
/// The optimizer-based entanglement checks run `trials / ENT_TRIAL_DIVISOR` trials (at least one).
pub const ENT_TRIAL_DIVISOR: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    /// Per-lemma tolerance overrides, keyed by lemma name.
    pub tolerances: BTreeMap<String, f64>,
    /// Overrides every lemma tolerance not listed in `tolerances`.
    pub global_tolerance: Option<f64>,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    /// Run only the checks whose name contains this string.
    pub filter: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 100,
            dims: DEFAULT_DIMS.to_vec(),
            tolerances: BTreeMap::new(),
            global_tolerance: None,
            threads: None,
            filter: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.dims.is_empty() {
            return Err("dims must not be empty".into());
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(format!("every dim must be at least 2, got {d}"));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d > 16) {
            return Err(format!(
                "dims above 16 are not supported by the exact smoothing solver, got {d}"
            ));
        }
        let names: Vec<&str> = LEMMAS.iter().map(|l| l.name).collect();
        if let Some(k) = self.tolerances.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(format!("unknown lemma in tolerance overrides: {k}"));
        }
        let all = self.tolerances.values().copied().chain(self.global_tolerance);
        if let Some(t) = all.into_iter().find(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(format!("tolerances must be finite and non-negative, got {t}"));
        }
        Ok(())
    }

    fn tolerance(&self, lemma: &Lemma) -> f64 {
        self.tolerances
            .get(lemma.name)
            .copied()
            .or(self.global_tolerance)
            .unwrap_or(lemma.tolerance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaResult {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Trials that ended in an error (also counted as failures).
    pub errors: usize,
    pub tolerance: f64,
    /// Largest violation over completed trials; positive values exceed the invariant.
    #[serde(serialize_with = "extended_float")]
    pub worst_violation: Option<f64>,
    pub worst_trial: Option<usize>,
    pub first_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub lemmas: Vec<LemmaResult>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn get(&self, name: &str) -> Option<&LemmaResult> {
        self.lemmas.iter().find(|l| l.name == name)
    }

    pub fn failing(&self) -> impl Iterator<Item = &LemmaResult> {
        self.lemmas.iter().filter(|l| l.failures > 0)
    }
}

fn extended_float<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        None => s.serialize_none(),
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        Some(v) if v.is_nan() => s.serialize_str("nan"),
        Some(v) if *v > 0.0 => s.serialize_str("inf"),
        Some(_) => s.serialize_str("-inf"),
    }
}

/// How many trials a lemma runs for a given configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Budget {
    Full,
    /// Optimizer-heavy entanglement checks.
    Reduced,
    /// Deterministic benchmark checks.
    Once,
}

struct Trial<'a> {
    rng: SeededRng,
    index: usize,
    dims: &'a [usize],
}

impl Trial<'_> {
    fn dim(&self) -> usize {
        self.dims[self.index % self.dims.len()]
    }

    fn bipartite(&self) -> (usize, usize) {
        BIPARTITE_DIMS[self.index % BIPARTITE_DIMS.len()]
    }

    fn state(&mut self, dim: usize) -> Result<DensityOperator<f64>> {
        random_density_with(dim, dim, &mut self.rng)
    }

    /// State of random rank between 1 and `dim`.
    fn state_any_rank(&mut self, dim: usize) -> Result<DensityOperator<f64>> {
        let rank = self.rng.random_range(1..=dim);
        random_density_with(dim, rank, &mut self.rng)
    }

    fn bipartite_state(&mut self, dims: (usize, usize)) -> Result<BipartiteState<f64>> {
        let n = dims.0 * dims.1;
        let rank = self.rng.random_range(1..=n);
        BipartiteState::new(random_density_with(n, rank, &mut self.rng)?, dims)
    }

    fn channel(&mut self, dim: usize) -> Result<QuantumChannel<f64>> {
        let out = self.rng.random_range(2..=dim);
        // the Stinespring isometry needs out · env ≥ dim
        let min_env = dim.div_ceil(out);
        let env = self.rng.random_range(min_env..=min_env + 2);
        random_channel_with(dim, out, env, &mut self.rng)
    }

    fn emax_config(&mut self, dims: (usize, usize)) -> EmaxConfig {
        EmaxConfig {
            seed: self.rng.random(),
            ..EmaxConfig::for_dims(dims)
        }
    }
}

type Check = fn(&mut Trial) -> Result<f64>;

struct Lemma {
    name: &'static str,
    tolerance: f64,
    budget: Budget,
    check: Check,
}

const fn lemma(name: &'static str, tolerance: f64, budget: Budget, check: Check) -> Lemma {
    Lemma {
        name,
        tolerance,
        budget,
        check,
    }
}

/// Every check, sorted by name.
static LEMMAS: &[Lemma] = &[
    lemma(
        "div_chernoff_dominates_dmin",
        1e-8,
        Budget::Full,
        div_chernoff_dominates_dmin,
    ),
    lemma("div_dmax_three_forms", 1e-8, Budget::Full, div_dmax_three_forms),
    lemma("div_joint_convexity_dmin", 1e-8, Budget::Full, div_joint_convexity_dmin),
    lemma("div_lemma10_sandwich", 1e-8, Budget::Full, div_lemma10_sandwich),
    lemma(
        "div_lemma11_unitary_invariance",
        1e-9,
        Budget::Full,
        div_lemma11_unitary_invariance,
    ),
    lemma(
        "div_lemma12_eigenvalue_bounds",
        1e-8,
        Budget::Full,
        div_lemma12_eigenvalue_bounds,
    ),
    lemma("div_lemma4_dmin_le_dmax", 1e-8, Budget::Full, div_lemma4_dmin_le_dmax),
    lemma("div_lemma6_nonnegativity", 1e-8, Budget::Full, div_lemma6_nonnegativity),
    lemma(
        "div_lemma7_cptp_monotonicity",
        1e-8,
        Budget::Full,
        div_lemma7_cptp_monotonicity,
    ),
    lemma("div_mixture_bound_dmax", 1e-8, Budget::Full, div_mixture_bound_dmax),
    lemma("div_renyi_limit_trend", 1e-8, Budget::Full, div_renyi_limit_trend),
    lemma(
        "ent_emax_separable_zero",
        1e-3,
        Budget::Reduced,
        ent_emax_separable_zero,
    ),
    lemma("ent_lemma13_ordering", 1e-3, Budget::Reduced, ent_lemma13_ordering),
    lemma(
        "ent_local_channel_nonincrease",
        2e-2,
        Budget::Reduced,
        ent_local_channel_nonincrease,
    ),
    lemma(
        "ent_local_unitary_invariance_ppt",
        1e-4,
        Budget::Full,
        ent_local_unitary_invariance_ppt,
    ),
    lemma(
        "ent_local_unitary_invariance_upper",
        2e-2,
        Budget::Reduced,
        ent_local_unitary_invariance_upper,
    ),
    lemma("ent_ppt_le_upper", 1e-8, Budget::Reduced, ent_ppt_le_upper),
    lemma("ent_theorem1_i_nonnegative", 1e-8, Budget::Full, |t| {
        condition(t, "i_nonnegative")
    }),
    lemma("ent_theorem1_ii_unitary_invariance", 1e-8, Budget::Full, |t| {
        condition(t, "ii_unitary_invariance")
    }),
    lemma("ent_theorem1_iii_partial_trace", 1e-8, Budget::Full, |t| {
        condition(t, "iii_partial_trace")
    }),
    lemma("ent_theorem1_iv_instrument", 1e-8, Budget::Full, |t| {
        condition(t, "iv_instrument")
    }),
    lemma("ent_theorem1_v_max", 1e-8, Budget::Full, |t| condition(t, "v_max")),
    lemma("ent_theorem1_v_sum", 1e-8, Budget::Full, |t| condition(t, "v_sum")),
    lemma("ent_theorem1_vi_tensor_projector", 1e-8, Budget::Full, |t| {
        condition(t, "vi_tensor_projector")
    }),
    lemma(
        "op_corollary1_trace_bound",
        1e-9,
        Budget::Full,
        op_corollary1_trace_bound,
    ),
    lemma("op_fidelity_chain", 1e-9, Budget::Full, op_fidelity_chain),
    lemma("op_gentle_measurement", 1e-9, Budget::Full, op_gentle_measurement),
    lemma(
        "op_lemma1_projector_extremality",
        1e-9,
        Budget::Full,
        op_lemma1_projector_extremality,
    ),
    lemma("op_lemma2_single_copy", 1e-9, Budget::Full, op_lemma2_single_copy),
    lemma("op_lemma3_cptp_projector", 1e-9, Budget::Full, op_lemma3_cptp_projector),
    lemma("op_triangle_inequality", 1e-9, Budget::Full, op_triangle_inequality),
    lemma(
        "smooth_classical_cross_validation",
        2e-3,
        Budget::Full,
        smooth_classical_cross_validation,
    ),
    lemma(
        "smooth_lemma5_certificate",
        1e-7,
        Budget::Full,
        smooth_lemma5_certificate,
    ),
    lemma(
        "smooth_lemma6_gentle_consistency",
        1e-7,
        Budget::Full,
        smooth_lemma6_gentle_consistency,
    ),
    lemma("smooth_monotone_in_eps", 1e-4, Budget::Full, smooth_monotone_in_eps),
    lemma(
        "smooth_order_dmax_exact_le_dmax",
        1e-8,
        Budget::Full,
        smooth_order_dmax_exact_le_dmax,
    ),
    lemma(
        "smooth_order_dmin_lower_le_dmax",
        1e-8,
        Budget::Full,
        smooth_order_dmin_lower_le_dmax,
    ),
    lemma(
        "smooth_order_dmin_lower_le_dmax_slack",
        1e-8,
        Budget::Full,
        smooth_order_dmin_lower_le_dmax_slack,
    ),
    lemma("smooth_reduction_at_zero", 1e-4, Budget::Full, smooth_reduction_at_zero),
    lemma(
        "spec_fast_dense_agreement",
        1e-8,
        Budget::Full,
        spec_fast_dense_agreement,
    ),
    lemma("spec_lemma2_grid", 1e-9, Budget::Full, spec_lemma2_grid),
    lemma("spec_monotone_trend", 0.0, Budget::Once, spec_monotone_trend),
    lemma("spec_per_n_sandwich", 1e-6, Budget::Full, spec_per_n_sandwich),
    lemma(
        "spec_relative_entropy_additivity",
        1e-8,
        Budget::Full,
        spec_relative_entropy_additivity,
    ),
];

pub fn lemma_names() -> Vec<&'static str> {
    LEMMAS.iter().map(|l| l.name).collect()
}

fn trial_count(budget: Budget, trials: usize) -> usize {
    match budget {
        Budget::Full => trials,
        Budget::Reduced => (trials / ENT_TRIAL_DIVISOR).max(1),
        Budget::Once => 1,
    }
}

/// Runs every lemma; the report is identical for identical configurations.
pub fn run_suite(config: &SuiteConfig) -> std::result::Result<SuiteReport, String> {
    config.validate()?;
    let selected = |l: &Lemma| config.filter.as_deref().is_none_or(|f| l.name.contains(f));
    let units: Vec<(usize, usize)> = LEMMAS
        .iter()
        .enumerate()
        .filter(|(_, l)| selected(l))
        .flat_map(|(k, l)| (0..trial_count(l.budget, config.trials)).map(move |t| (k, t)))
        .collect();
    let threads = config
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let next = AtomicUsize::new(0);
    let outcomes: Mutex<Vec<(usize, usize, Result<f64>)>> = Mutex::new(Vec::with_capacity(units.len()));
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(k, t)) = units.get(i) else { break };
                let mut trial = Trial {
                    rng: seeded(config.seed, ((k as u64) << 32) | t as u64),
                    index: t,
                    dims: &config.dims,
                };
                let out = (LEMMAS[k].check)(&mut trial);
                outcomes
                    .lock()
                    .expect("no worker panics while holding the lock")
                    .push((k, t, out));
            });
        }
    });
    let mut outcomes = outcomes.into_inner().expect("workers joined");
    outcomes.sort_by_key(|&(k, t, _)| (k, t));

    let mut lemmas: Vec<LemmaResult> = LEMMAS
        .iter()
        .map(|l| LemmaResult {
            name: l.name,
            trials: trial_count(l.budget, config.trials),
            failures: 0,
            errors: 0,
            tolerance: config.tolerance(l),
            worst_violation: None,
            worst_trial: None,
            first_error: None,
        })
        .collect();
    for (k, t, out) in outcomes {
        let r = &mut lemmas[k];
        match out {
            Ok(v) => {
                if v.is_nan() || v > r.tolerance {
                    r.failures += 1;
                }
                if r.worst_violation.is_none_or(|w| v > w || v.is_nan()) {
                    r.worst_violation = Some(v);
                    r.worst_trial = Some(t);
                }
            }
            Err(e) => {
                r.failures += 1;
                r.errors += 1;
                r.first_error.get_or_insert_with(|| format!("trial {t}: {e}"));
            }
        }
    }
    lemmas.retain(|r| config.filter.as_deref().is_none_or(|f| r.name.contains(f)));
    if lemmas.is_empty() {
        return Err(format!(
            "no check name contains `{}`",
            config.filter.as_deref().unwrap_or_default()
        ));
    }
    let pass = lemmas.iter().all(|l| l.failures == 0);
    Ok(SuiteReport {
        seed: config.seed,
        trials: config.trials,
        dims: config.dims.clone(),
        lemmas,
        pass,
    })
}

/// `a − b` on the extended reals; `∞ − ∞` counts as satisfied.
fn excess(a: DivergenceValue<f64>, b: DivergenceValue<f64>) -> f64 {
    match (a, b) {
        (DivergenceValue::Finite(x), DivergenceValue::Finite(y)) => x - y,
        (DivergenceValue::Infinite, DivergenceValue::Finite(_)) => f64::INFINITY,
        (_, DivergenceValue::Infinite) => f64::NEG_INFINITY,
    }
}

fn abs_diff(a: DivergenceValue<f64>, b: DivergenceValue<f64>) -> f64 {
    match (a, b) {
        (DivergenceValue::Infinite, DivergenceValue::Infinite) => 0.0,
        _ => excess(a, b).abs().max(excess(b, a).abs()),
    }
}

fn mix(weights: &[f64], ops: &[DensityOperator<f64>]) -> HermitianOperator<f64> {
    let dim = ops[0].dim();
    ops.iter()
        .zip(weights)
        .fold(HermitianOperator::zeros(dim), |acc, (o, &w)| &acc + &o.scale(w))
}

fn op_lemma1_projector_extremality(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let a = random_hermitian::<f64, _>(d, &mut t.rng);
    let b = random_hermitian::<f64, _>(d, &mut t.rng);
    let p = random_contraction_with::<f64, _>(d, &mut t.rng);
    let diff = &a - &b;
    let tp = p.inner(&diff);
    let side = |rel| compare_projector(&a, &b, rel).map(|q| q.inner(&diff));
    let (geq, gt, leq, lt) = (
        side(Relation::Geq)?,
        side(Relation::Gt)?,
        side(Relation::Leq)?,
        side(Relation::Lt)?,
    );
    Ok([tp - geq, tp - gt, leq - tp, lt - tp]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

fn op_lemma2_single_copy(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let omega = random_positive_with::<f64, _>(d, &mut t.rng);
    let mut worst = f64::NEG_INFINITY;
    for gamma in [-1.0f64, 0.0, 0.5, 2.0] {
        let p = compare_projector(&rho, &omega.scale(gamma.exp2()), Relation::Geq)?;
        worst = worst.max(p.inner(&omega) - (-gamma).exp2());
    }
    Ok(worst)
}

fn op_lemma3_cptp_projector(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let a = random_hermitian::<f64, _>(d, &mut t.rng);
    let b = random_hermitian::<f64, _>(d, &mut t.rng);
    let ch = t.channel(d)?;
    let (ta, tb) = (ch.apply(&a)?, ch.apply(&b)?);
    let after = compare_projector(&ta, &tb, Relation::Geq)?.inner(&(&ta - &tb));
    let before = compare_projector(&a, &b, Relation::Geq)?.inner(&(&a - &b));
    Ok(after - before)
}

fn op_corollary1_trace_bound(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let a = random_hermitian::<f64, _>(d, &mut t.rng);
    let b = random_hermitian::<f64, _>(d, &mut t.rng);
    let p = random_contraction_with::<f64, _>(d, &mut t.rng);
    let eps = trace_distance(&a, &b)?;
    Ok(p.inner(&(&a - &b)) - eps)
}

fn op_gentle_measurement(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let mut rho = t.state_any_rank(d)?;
    if t.index % 2 == 1 {
        let s = t.rng.random_range(0.3..1.0);
        rho = DensityOperator::new(rho.scale(s))?;
    }
    // Λ = I − sC with C a random contraction keeps Tr(ρΛ) near one for small s.
    let s: f64 = t.rng.random_range(0.0..1.0f64).powi(2);
    let c = random_contraction_with::<f64, _>(d, &mut t.rng);
    let lambda = &HermitianOperator::identity(d) - &c.scale(s);
    let delta = (1.0 - rho.inner(&lambda)).max(0.0);
    let root = sqrt_psd(&lambda)?;
    let measured = rho.conjugate(root.entries());
    Ok(trace_distance(&rho, &measured)? - 2.0 * delta.sqrt())
}

fn op_fidelity_chain(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let other = t.state_any_rank(d)?;
    let f = fidelity(&rho, &other)?;
    let half = 0.5 * trace_distance(&rho, &other)?;
    let middle = (1.0 - f * f).max(0.0).sqrt();
    Ok((half - middle).max(middle - (2.0 * (1.0 - f)).max(0.0).sqrt()))
}

fn op_triangle_inequality(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let a = t.state_any_rank(d)?;
    let b = t.state_any_rank(d)?;
    let c = t.state_any_rank(d)?;
    Ok(trace_distance(&a, &c)? - trace_distance(&a, &b)? - trace_distance(&b, &c)?)
}

fn div_lemma4_dmin_le_dmax(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let sigma = if t.index.is_multiple_of(2) {
        random_positive_with::<f64, _>(d, &mut t.rng)
    } else {
        t.state_any_rank(d)?.into_op()
    };
    Ok(excess(d_min(&rho, &sigma)?, d_max(&rho, &sigma)?))
}

fn div_lemma6_nonnegativity(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let sigma = t.state_any_rank(d)?;
    let full = t.state(d)?;
    let full_other = t.state(d)?;
    let negativity = [d_min(&rho, &sigma)?, d_max(&rho, &sigma)?]
        .into_iter()
        .map(|v| excess(DivergenceValue::Finite(0.0), v))
        .fold(f64::NEG_INFINITY, f64::max);
    let self_dmax = d_max(&rho, &rho)?.as_f64().abs();
    let equal_support = d_min(&full, &full_other)?.as_f64().abs();
    Ok(negativity.max(self_dmax).max(equal_support))
}

fn div_lemma7_cptp_monotonicity(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let sigma = t.state_any_rank(d)?;
    let ch = t.channel(d)?;
    let (tr, ts) = (ch.apply(&rho)?, ch.apply(&sigma)?);
    let dmin = excess(d_min(&tr, &ts)?, d_min(&rho, &sigma)?);
    let dmax = excess(d_max(&tr, &ts)?, d_max(&rho, &sigma)?);
    Ok(dmin.max(dmax))
}

fn div_joint_convexity_dmin(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let k = t.rng.random_range(2..=3);
    let p = random_simplex_with(k, &mut t.rng);
    let mut rhos = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    let mut avg = 0.0;
    for w in &p {
        let r = t.state_any_rank(d)?;
        let s = t.state_any_rank(d)?;
        avg += w * d_min(&r, &s)?.as_f64();
        rhos.push(r);
        sigmas.push(s);
    }
    Ok(d_min(&mix(&p, &rhos), &mix(&p, &sigmas))?.as_f64() - avg)
}

fn div_mixture_bound_dmax(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let k = t.rng.random_range(2..=3);
    let p = random_simplex_with(k, &mut t.rng);
    let mut rhos = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    let mut worst = DivergenceValue::Finite(f64::NEG_INFINITY);
    for _ in 0..k {
        let r = t.state_any_rank(d)?;
        let s = t.state(d)?;
        let v = d_max(&r, &s)?;
        if excess(v, worst) > 0.0 {
            worst = v;
        }
        rhos.push(r);
        sigmas.push(s);
    }
    Ok(excess(d_max(&mix(&p, &rhos), &mix(&p, &sigmas))?, worst))
}

fn div_lemma10_sandwich(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let sigma = t.state_any_rank(d)?;
    let s = relative_entropy(&rho, &sigma)?;
    Ok(excess(d_min(&rho, &sigma)?, s).max(excess(s, d_max(&rho, &sigma)?)))
}

fn div_lemma11_unitary_invariance(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let sigma = t.state_any_rank(d)?;
    let u = random_unitary_with::<f64, _>(d, &mut t.rng);
    let (ru, su) = (rho.conjugate(&u), sigma.conjugate(&u));
    let dmin = abs_diff(d_min(&ru, &su)?, d_min(&rho, &sigma)?);
    let dmax = abs_diff(d_max(&ru, &su)?, d_max(&rho, &sigma)?);
    Ok(dmin.max(dmax))
}

fn div_lemma12_eigenvalue_bounds(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let sigma = t.state(d)?;
    let mu_min = sigma
        .eigenvalues()
        .into_iter()
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    let dmax_gap = d_max(&rho, &sigma)?.as_f64() + mu_min.log2();
    let half = 0.5 * trace_distance(&rho, &sigma)?;
    let dmin_gap = d_min(&rho, &sigma)?.as_f64() + (1.0 - half).log2();
    let overlap_gap = (1.0 - half) - support_projector(&rho).inner(&sigma);
    Ok(dmax_gap.max(dmin_gap).max(overlap_gap))
}

fn div_dmax_three_forms(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state(d)?;
    let sigma = t.state(d)?;
    Ok(d_max_forms(&rho, &sigma)?.spread())
}

fn div_renyi_limit_trend(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let sigma = t.state(d)?;
    let target = d_min(&rho, &sigma)?.as_f64();
    let mut errs = Vec::with_capacity(3);
    for alpha in [1e-2, 1e-3, 1e-4] {
        errs.push((renyi_relative(&rho, &sigma, alpha)?.as_f64() - target).abs());
    }
    Ok((errs[1] - errs[0]).max(errs[2] - errs[1]))
}

fn div_chernoff_dominates_dmin(t: &mut Trial) -> Result<f64> {
    let d = t.dim();
    let rho = t.state_any_rank(d)?;
    let sigma = t.state_any_rank(d)?;
    Ok(excess(d_min(&rho, &sigma)?, chernoff_bound(&rho, &sigma)?))
}

/// A full-rank `σ` keeps every smoothing quantity finite.
fn smoothing_pair(t: &mut Trial) -> Result<(DensityOperator<f64>, DensityOperator<f64>)> {
    let d = t.dim();
    Ok((t.state_any_rank(d)?, t.state(d)?))
}

fn smooth_reduction_at_zero(t: &mut Trial) -> Result<f64> {
    let (rho, sigma) = smoothing_pair(t)?;
    let exact = smooth_dmax_exact(&rho, &sigma, 0.0)?.value_bits;
    let dmax = d_max(&rho, &sigma)?.as_f64();
    let lower = smooth_dmin_lower(&rho, &sigma, 1e-12)?.value.as_f64();
    let dmin = d_min(&rho, &sigma)?.as_f64();
    Ok((exact - dmax).abs().max((lower - dmin).abs()))
}

fn smooth_monotone_in_eps(t: &mut Trial) -> Result<f64> {
    let (rho, sigma) = smoothing_pair(t)?;
    let small = t.rng.random_range(0.01..0.2);
    let large = small + t.rng.random_range(0.01..0.2);
    let dmax = smooth_dmax_exact(&rho, &sigma, large)?.value_bits - smooth_dmax_exact(&rho, &sigma, small)?.value_bits;
    let dmin = excess(
        smooth_dmin_lower(&rho, &sigma, small)?.value,
        smooth_dmin_lower(&rho, &sigma, large)?.value,
    );
    Ok(dmax.max(dmin))
}

fn smooth_order_dmax_exact_le_dmax(t: &mut Trial) -> Result<f64> {
    let (rho, sigma) = smoothing_pair(t)?;
    let eps = t.rng.random_range(0.0..1.0);
    Ok(smooth_dmax_exact(&rho, &sigma, eps)?.value_bits - d_max(&rho, &sigma)?.as_f64())
}

fn smooth_order_dmin_lower_le_dmax(t: &mut Trial) -> Result<f64> {
    let (rho, sigma) = smoothing_pair(t)?;
    let eps = t.rng.random_range(0.0..1.0f64).max(1e-12);
    Ok(excess(
        smooth_dmin_lower(&rho, &sigma, eps)?.value,
        d_max(&rho, &sigma)?,
    ))
}

/// The order relation with the slack `−log₂(1 − ε²/4)` that the projector sweep can exceed `d_max` by.
fn smooth_order_dmin_lower_le_dmax_slack(t: &mut Trial) -> Result<f64> {
    let (rho, sigma) = smoothing_pair(t)?;
    let eps = t.rng.random_range(0.0..1.0f64).max(1e-12);
    let slack = -(1.0 - eps * eps / 4.0).log2();
    Ok(excess(smooth_dmin_lower(&rho, &sigma, eps)?.value, d_max(&rho, &sigma)?) - slack)
}

fn smooth_lemma5_certificate(t: &mut Trial) -> Result<f64> {
    let (rho, sigma) = smoothing_pair(t)?;
    let dmax = d_max(&rho, &sigma)?.as_f64();
    let lambda = dmax - t.rng.random_range(0.0..3.0);
    let cert = lemma5_smooth(&rho, &sigma, lambda)?;
    let dominance = d_max(&cert.smoothed, &sigma)?.as_f64() - lambda;
    let distance = trace_distance(&cert.smoothed, &rho)? - (8.0 * cert.delta.trace()).sqrt();
    let trace = cert.smoothed.trace() - rho.trace();
    Ok(dominance.max(distance).max(trace))
}

fn smooth_lemma6_gentle_consistency(t: &mut Trial) -> Result<f64> {
    let (rho, sigma) = smoothing_pair(t)?;
    let eps = t.rng.random_range(0.05..0.5);
    let up = smooth_dmax_upper(&rho, &sigma, eps)?;
    Ok(gentle_epsilon(&rho, &sigma, up.lambda_bits)? - eps)
}

/// Grid resolution of the diagonal brute force, in bits.
const CLASSICAL_GRID_BITS: f64 = 1e-4;

fn smooth_classical_cross_validation(t: &mut Trial) -> Result<f64> {
    let d = t.dim().min(8);
    let p = random_simplex_with(d, &mut t.rng);
    let q = random_simplex_with(d, &mut t.rng);
    let eps = t.rng.random_range(0.01..0.3);
    let exact = smooth_dmax_exact(
        &DensityOperator::from_diagonal(&p)?,
        &HermitianOperator::from_real_diagonal(&q),
        eps,
    )?
    .value_bits;
    // Scan λ upwards; at each grid point the cheapest diagonal candidate below 2^λ q
    // is min(p, 2^λ q), which lies in the ball iff the removed mass is at most ε.
    let top = p
        .iter()
        .zip(&q)
        .map(|(a, b)| (a / b).log2())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut lambda = top - 60.0;
    let step = 1.0;
    let removed = |l: f64| p.iter().zip(&q).map(|(a, b)| (a - l.exp2() * b).max(0.0)).sum::<f64>();
    while removed(lambda + step) > eps {
        lambda += step;
    }
    let mut fine = lambda;
    while removed(fine) > eps {
        fine += CLASSICAL_GRID_BITS;
    }
    Ok((exact - fine).abs())
}

/// Builds the entanglement test state for a trial.
fn ent_state(t: &mut Trial) -> Result<BipartiteState<f64>> {
    let dims = t.bipartite();
    t.bipartite_state(dims)
}

fn ent_emax_separable_zero(t: &mut Trial) -> Result<f64> {
    let dims = t.bipartite();
    let k = t.rng.random_range(1..=4);
    let weights = random_simplex_with(k, &mut t.rng);
    let parts = weights
        .into_iter()
        .map(|w| {
            let a = random_pure_vector_with::<f64, _>(dims.0, &mut t.rng);
            let b = random_pure_vector_with::<f64, _>(dims.1, &mut t.rng);
            (w, a, b)
        })
        .collect();
    let ensemble = SeparableEnsemble::from_parts(dims, parts)?;
    let rho = BipartiteState::new(ensemble.assemble(), dims)?;
    let config = t.emax_config(dims);
    Ok(emax(&rho, &config)?.upper_bits)
}

fn ent_lemma13_ordering(t: &mut Trial) -> Result<f64> {
    let rho = ent_state(t)?;
    let config = t.emax_config(rho.dims());
    Ok(rel_ent_entanglement(&rho, &config)?.value_bits - emax(&rho, &config)?.upper_bits)
}

fn ent_ppt_le_upper(t: &mut Trial) -> Result<f64> {
    let rho = ent_state(t)?;
    let config = t.emax_config(rho.dims());
    let r = emax(&rho, &config)?;
    Ok(ppt_emax_lower(&rho)?.lower_bits - r.upper_bits)
}

fn local_unitary(t: &mut Trial, dims: (usize, usize)) -> qdiv_core::operator::CMatrix<f64> {
    let ua = random_unitary_with::<f64, _>(dims.0, &mut t.rng);
    let ub = random_unitary_with::<f64, _>(dims.1, &mut t.rng);
    ua.kronecker(&ub)
}

fn ent_local_unitary_invariance_upper(t: &mut Trial) -> Result<f64> {
    let rho = ent_state(t)?;
    let dims = rho.dims();
    let u = local_unitary(t, dims);
    let rotated = BipartiteState::new(DensityOperator::new(rho.state().conjugate(&u))?, dims)?;
    let config = t.emax_config(dims);
    Ok((emax(&rho, &config)?.upper_bits - emax(&rotated, &config)?.upper_bits).abs())
}

fn ent_local_unitary_invariance_ppt(t: &mut Trial) -> Result<f64> {
    let rho = ent_state(t)?;
    let dims = rho.dims();
    let u = local_unitary(t, dims);
    let rotated = BipartiteState::new(DensityOperator::new(rho.state().conjugate(&u))?, dims)?;
    Ok((ppt_emax_lower(&rho)?.lower_bits - ppt_emax_lower(&rotated)?.lower_bits).abs())
}

fn ent_local_channel_nonincrease(t: &mut Trial) -> Result<f64> {
    let rho = ent_state(t)?;
    let dims = rho.dims();
    let env_a = t.rng.random_range(1..=2);
    let env_b = t.rng.random_range(1..=2);
    let ca = random_channel_with::<f64, _>(dims.0, dims.0, env_a, &mut t.rng)?;
    let cb = random_channel_with::<f64, _>(dims.1, dims.1, env_b, &mut t.rng)?;
    let out = BipartiteState::new(QuantumChannel::local(&ca, &cb).apply_state(rho.state())?, dims)?;
    let config = t.emax_config(dims);
    Ok(emax(&out, &config)?.upper_bits - emax(&rho, &config)?.upper_bits)
}

fn condition(t: &mut Trial, name: &str) -> Result<f64> {
    let rho = ent_state(t)?;
    let seed = t.rng.random();
    let report = monotone_condition_suite(&rho, seed)?;
    Ok(report.get(name).map_or(f64::INFINITY, |c| c.violation))
}

/// Commuting pair `(U diag(p) U†, U diag(q) U†)` on `d` levels.
fn commuting_pair(t: &mut Trial, d: usize) -> Result<IidPair<f64>> {
    let p = random_simplex_with(d, &mut t.rng);
    let q = random_simplex_with(d, &mut t.rng);
    let u = random_unitary_with::<f64, _>(d, &mut t.rng);
    let rho = DensityOperator::new(HermitianOperator::from_real_diagonal(&p).conjugate(&u))?;
    let sigma = DensityOperator::new(HermitianOperator::from_real_diagonal(&q).conjugate(&u))?;
    IidPair::new(rho, sigma)
}

fn spec_fast_dense_agreement(t: &mut Trial) -> Result<f64> {
    let pair = commuting_pair(t, 2)?;
    let n = t.rng.random_range(1..=10);
    let gamma = t.rng.random_range(-1.5..1.5);
    let dense = spectral_trace_with(&pair, n, gamma, SpectralPath::Dense)?;
    let fast = spectral_trace_with(&pair, n, gamma, SpectralPath::Classical)?;
    Ok((dense - fast).abs())
}

const LEMMA2_GAMMAS: [f64; 6] = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

fn spec_lemma2_grid(t: &mut Trial) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    let d = 2 + t.index % 2;
    let pair = IidPair::new(t.state_any_rank(d)?, t.state(d)?)?;
    let n_dense = t.rng.random_range(1..=if d == 2 { 4 } else { 3 });
    for gamma in LEMMA2_GAMMAS {
        let c = lemma2_bound_check_with(&pair, n_dense, gamma, SpectralPath::Dense)?;
        worst = worst.max(c.lhs - c.bound);
    }
    let commuting = commuting_pair(t, d)?;
    let n_fast = t.rng.random_range(1..=50);
    for gamma in LEMMA2_GAMMAS {
        let c = lemma2_bound_check_with(&commuting, n_fast, gamma, SpectralPath::Classical)?;
        worst = worst.max(c.lhs - c.bound);
    }
    Ok(worst)
}

/// `ε` for the per-n sandwich, small enough that smoothing moves `D_max^ε / n` by well under the tolerance.
const SANDWICH_EPS: f64 = 1e-9;

fn spec_per_n_sandwich(t: &mut Trial) -> Result<f64> {
    let d = 2 + t.index % 2;
    let pair = commuting_pair(t, d)?;
    let ns: Vec<usize> = (1..=8).collect();
    let curve = rate_curve_with(&pair, SANDWICH_EPS, &ns, SpectralPath::Classical)?;
    Ok(curve
        .iter()
        .map(|pt| (pt.dmin_over_n - pt.rel_entropy).max(pt.rel_entropy - pt.dmax_over_n))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Benchmark pair `diag(3/4, 1/4)`, `diag(1/2, 1/2)` at `ε = 0.05`.
fn spec_monotone_trend(_: &mut Trial) -> Result<f64> {
    let pair: IidPair<f64> = IidPair::new(
        DensityOperator::from_diagonal(&[0.75, 0.25])?,
        DensityOperator::from_diagonal(&[0.5, 0.5])?,
    )?;
    let curve = rate_curve_with(&pair, 0.05, &[1, 10], SpectralPath::Auto)?;
    let err = |i: usize| (curve[i].dmax_over_n - curve[i].rel_entropy).abs();
    // positive when the n = 10 error is not strictly smaller
    Ok(if err(1) < err(0) {
        err(1) - err(0)
    } else {
        (err(1) - err(0)).max(f64::MIN_POSITIVE)
    })
}

fn spec_relative_entropy_additivity(t: &mut Trial) -> Result<f64> {
    let d = 2 + t.index % 2;
    let rho = t.state_any_rank(d)?;
    // a spectral floor keeps every eigenvalue of σ^⊗n above the relative support cutoff
    let sigma = DensityOperator::new(mix(&[0.9, 0.1], &[t.state(d)?, DensityOperator::maximally_mixed(d)]))?;
    let single = relative_entropy(&rho, &sigma)?.as_f64();
    let n_max = if d == 2 { 4 } else { 3 };
    let mut worst = 0.0f64;
    for n in 2..=n_max {
        let (rn, sn) = (tensor_power(&rho, n)?, tensor_power(&sigma, n)?);
        let multi = relative_entropy(&rn, &sn)?.as_f64();
        worst = worst.max((multi - n as f64 * single).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_table_is_sorted_and_unique() {
        let names = lemma_names();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(names, sorted);
    }

    #[test]
    fn trial_budgets() {
        assert_eq!(trial_count(Budget::Full, 100), 100);
        assert_eq!(trial_count(Budget::Reduced, 100), 5);
        assert_eq!(trial_count(Budget::Reduced, 1), 1);
        assert_eq!(trial_count(Budget::Once, 100), 1);
    }

    #[test]
    fn config_validation() {
        assert!(SuiteConfig::default().validate().is_ok());
        let bad = |f: fn(&mut SuiteConfig)| {
            let mut c = SuiteConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.trials = 0));
        assert!(bad(|c| c.dims = vec![1]));
        assert!(bad(|c| c.dims.clear()));
        assert!(bad(|c| {
            c.tolerances.insert("no_such_lemma".into(), 1.0);
        }));
        assert!(bad(|c| c.global_tolerance = Some(-1.0)));
    }

    #[test]
    fn extended_float_serialization() {
        #[derive(Serialize)]
        struct W(#[serde(serialize_with = "extended_float")] Option<f64>);
        assert_eq!(serde_json::to_string(&W(Some(f64::INFINITY))).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&W(Some(-1.5))).unwrap(), "-1.5");
        assert_eq!(serde_json::to_string(&W(None)).unwrap(), "null");
    }

    #[test]
    fn excess_on_extended_reals() {
        use DivergenceValue::{Finite, Infinite};
        assert_eq!(excess(Finite(1.0), Finite(0.25)), 0.75);
        assert_eq!(excess(Infinite, Finite(0.0)), f64::INFINITY);
        assert_eq!(excess(Infinite, Infinite), f64::NEG_INFINITY);
        assert_eq!(abs_diff(Infinite, Infinite), 0.0);
        assert_eq!(abs_diff(Finite(0.0), Infinite), f64::INFINITY);
    }
}
