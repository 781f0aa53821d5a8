use serde::Serialize;

use crate::divergence::relative::relative_entropy;
use crate::divergence::DivergenceValue;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::smoothing::{smooth_dmax_upper, smooth_dmin_exact_classical, smooth_dmin_lower};
use crate::spectral::pair::{tensor_power, IidPair};
use crate::spectral::trace::SpectralPath;
use crate::spectral::types::{is_neg_inf, log_sum_exp, type_classes, TypeClass};

/// Smoothing parameter used for curves when none is given.
pub const DEFAULT_EPS: f64 = 0.05;
/// Sequence spaces up to this size use the exact subset search for `D_min^ε`.
const EXACT_DMIN_SEQUENCES: usize = 20;

/// Per-block smoothed divergences of `ρ^⊗n` against `σ^⊗n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePoint<T> {
    pub n: usize,
    pub eps: T,
    pub dmax_over_n: T,
    pub dmin_over_n: T,
    /// `S(ρ‖σ)`, independent of `n`.
    pub rel_entropy: T,
}

/// Finite-n estimates of the sup- and inf-spectral divergence rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateEstimate<T> {
    pub n: usize,
    pub sup_est: T,
    pub inf_est: T,
}

/// `min log₂ t` such that `Σ (p^⊗n − t q^⊗n)₊ ≤ ε`, the smoothed `D_max`
/// of commuting product states, by water-filling over type classes.
pub fn classical_smooth_dmax<T: Real>(p: &[T], q: &[T], n: usize, eps: T) -> Result<T> {
    let mut classes = type_classes(p, q, n)?;
    if classes.iter().any(|c| is_neg_inf(c.ln_q)) {
        return Err(Error::SupportViolation);
    }
    let total: T = classes.iter().fold(T::zero(), |a, c| a + c.p_mass());
    if eps >= total {
        return Err(Error::invalid("smoothing radius covers the whole state"));
    }
    classes.sort_by(|a, b| {
        b.log_ratio()
            .partial_cmp(&a.log_ratio())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let ln2 = T::lit(2f64.ln());
    let mut a = T::zero();
    let mut ln_b_terms: Vec<T> = Vec::with_capacity(classes.len());
    for (k, class) in classes.iter().enumerate() {
        a += class.p_mass();
        ln_b_terms.push(class.ln_count + class.ln_q);
        if a <= eps {
            continue;
        }
        let ln_b = log_sum_exp(ln_b_terms.iter().copied());
        // On the segment below this class, f(λ) = a − 2^λ b.
        let lambda = (a - eps).log2() - ln_b / ln2;
        let floor = classes.get(k + 1).map(TypeClass::log_ratio);
        if floor.is_none_or(|f| lambda >= f) {
            return Ok(lambda.min(class.log_ratio()));
        }
    }
    unreachable!("the last segment always contains the root")
}

/// Largest `−log₂ q^⊗n(S)` over supports `S` found by dropping sequences in
/// increasing order of `p/q` while the dropped `p`-mass stays within `ε`.
/// Exact for at most 20 sequences; a lower bound on the smoothed `D_min` otherwise.
pub fn classical_smooth_dmin<T: Real>(p: &[T], q: &[T], n: usize, eps: T) -> Result<DivergenceValue<T>> {
    let support = p.iter().filter(|&&x| x > T::zero()).count();
    let sequences = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(support));
    if sequences.is_some_and(|s| s <= EXACT_DMIN_SEQUENCES) {
        let (pn, qn) = product_vectors(p, q, n);
        return smooth_dmin_exact_classical(&pn, &qn, eps);
    }
    let mut classes = type_classes(p, q, n)?;
    classes.sort_by(|a, b| {
        a.log_ratio()
            .partial_cmp(&b.log_ratio())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut budget = eps;
    let mut kept: Vec<T> = Vec::with_capacity(classes.len());
    for class in &classes {
        let count = class.ln_count.exp();
        let drop = if class.p_mass() <= budget {
            count
        } else {
            (budget.ln() - class.ln_p).exp().floor().min(count).max(T::zero())
        };
        budget -= drop * class.ln_p.exp();
        let left = count - drop;
        if left > T::zero() && !is_neg_inf(class.ln_q) {
            kept.push(left.ln() + class.ln_q);
        }
    }
    if kept.is_empty() {
        return Ok(DivergenceValue::Infinite);
    }
    let bits = -log_sum_exp(kept.iter().copied()) / T::lit(2f64.ln());
    Ok(DivergenceValue::Finite(bits.max(T::zero())))
}

fn product_vectors<T: Real>(p: &[T], q: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let (mut pn, mut qn) = (vec![T::one()], vec![T::one()]);
    for _ in 0..n {
        pn = pn.iter().flat_map(|&a| p.iter().map(move |&b| a * b)).collect();
        qn = qn.iter().flat_map(|&a| q.iter().map(move |&b| a * b)).collect();
    }
    (pn, qn)
}

fn finite<T: Real>(v: DivergenceValue<T>, what: &str) -> Result<T> {
    v.bits().ok_or_else(|| Error::invalid(format!("{what} is infinite")))
}

fn rate_point<T: Real>(
    pair: &IidPair<T>,
    eps: T,
    n: usize,
    rel_entropy: T,
    path: SpectralPath,
) -> Result<RatePoint<T>> {
    let nf = T::lit(n as f64);
    let (dmax, dmin) = if path.classical(pair) {
        let (p, q) = pair.require_joint()?;
        (
            classical_smooth_dmax(p, q, n, eps)?,
            finite(classical_smooth_dmin(p, q, n, eps)?, "smoothed D_min")?,
        )
    } else {
        let rho_n = tensor_power(pair.rho(), n)?;
        let sigma_n = tensor_power(pair.sigma(), n)?;
        (
            smooth_dmax_upper(&rho_n, &sigma_n, eps)?.lambda_bits,
            finite(smooth_dmin_lower(&rho_n, &sigma_n, eps)?.value, "smoothed D_min")?,
        )
    };
    Ok(RatePoint {
        n,
        eps,
        dmax_over_n: dmax / nf,
        dmin_over_n: dmin / nf,
        rel_entropy,
    })
}

/// Smoothed `D_max/n` and `D_min/n` at each `n`; commuting pairs use the
/// classical smoothers on type classes.
pub fn rate_curve<T: Real>(pair: &IidPair<T>, eps: T, n_list: &[usize]) -> Result<Vec<RatePoint<T>>> {
    rate_curve_with(pair, eps, n_list, SpectralPath::Auto)
}

pub fn rate_curve_with<T: Real>(
    pair: &IidPair<T>,
    eps: T,
    n_list: &[usize],
    path: SpectralPath,
) -> Result<Vec<RatePoint<T>>> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::invalid("eps must lie in (0, 1)"));
    }
    if n_list.contains(&0) {
        return Err(Error::invalid("block lengths must be positive"));
    }
    let rel = finite(relative_entropy(pair.rho(), pair.sigma())?, "relative entropy")?;
    n_list.iter().map(|&n| rate_point(pair, eps, n, rel, path)).collect()
}

/// The curve's values at `n_max`: finite-n stand-ins for the asymptotic
/// sup- and inf-spectral rates, not their limits.
pub fn divergence_rate_estimate<T: Real>(pair: &IidPair<T>, eps: T, n_max: usize) -> Result<RateEstimate<T>> {
    let point = rate_curve(pair, eps, &[n_max])?[0];
    Ok(RateEstimate {
        n: n_max,
        sup_est: point.dmax_over_n,
        inf_est: point.dmin_over_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::random::{random_density_with, seeded};
    use crate::operator::DensityOperator;
    use crate::smoothing::smooth_dmax_exact;

    const KL: f64 = 0.188_721_875_540_867;

    fn benchmark() -> IidPair<f64> {
        IidPair::new(
            DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap(),
            DensityOperator::from_diagonal(&[0.5, 0.5]).unwrap(),
        )
        .unwrap()
    }

    /// Water-filling on the explicit sequence space, by bisection.
    fn brute_dmax(p: &[f64], q: &[f64], n: usize, eps: f64) -> f64 {
        let (pn, qn) = product_vectors(p, q, n);
        let f = |l: f64| -> f64 { pn.iter().zip(&qn).map(|(a, b)| (a - 2f64.powf(l) * b).max(0.0)).sum() };
        let (mut lo, mut hi) = (-60.0, 60.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn water_filling_matches_sequence_space() {
        let mut rng = seeded(51, 0);
        for n in 1..=6 {
            let p = random_density_with::<f64, _>(3, 3, &mut rng).unwrap().eigenvalues();
            let q = random_density_with::<f64, _>(3, 3, &mut rng).unwrap().eigenvalues();
            for eps in [0.01, 0.1, 0.3] {
                let fast = classical_smooth_dmax(&p, &q, n, eps).unwrap();
                let slow = brute_dmax(&p, &q, n, eps);
                assert!((fast - slow).abs() < 1e-9, "n={n} eps={eps}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn water_filling_matches_matrix_solver() {
        let v = classical_smooth_dmax(&[0.9, 0.1], &[0.5, 0.5], 1, 0.2).unwrap();
        assert!((v - 1.4f64.log2()).abs() < 1e-12);
        let rho = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let sigma = DensityOperator::from_diagonal(&[0.5, 0.5]).unwrap();
        let exact = smooth_dmax_exact(&rho, &sigma, 0.2).unwrap().value_bits;
        assert!((v - exact).abs() < 1e-3);
    }

    #[test]
    fn drop_sweep_small_cases_are_exact() {
        let v = classical_smooth_dmin(&[0.9, 0.1], &[0.5, 0.5], 1, 0.25).unwrap();
        assert_eq!(v, DivergenceValue::Finite(1.0));
    }

    /// Bounded knapsack over the classes of a binary alphabet: drop `mₖ`
    /// sequences from the class with `k` first letters, maximizing dropped `q`.
    fn knapsack_dmin(p: [f64; 2], q: [f64; 2], n: usize, eps: f64) -> f64 {
        let binom = |k: usize| (0..k).fold(1usize, |c, i| c * (n - i) / (i + 1));
        let classes: Vec<(usize, f64, f64)> = (0..=n)
            .map(|k| {
                let pe = p[0].powi(k as i32) * p[1].powi((n - k) as i32);
                let qe = q[0].powi(k as i32) * q[1].powi((n - k) as i32);
                (binom(k), pe, qe)
            })
            .collect();
        fn search(cls: &[(usize, f64, f64)], budget: f64) -> f64 {
            let Some((&(count, pe, qe), rest)) = cls.split_first() else {
                return 0.0;
            };
            (0..=count)
                .take_while(|&m| m as f64 * pe <= budget + 1e-15)
                .map(|m| m as f64 * qe + search(rest, budget - m as f64 * pe))
                .fold(0.0, f64::max)
        }
        -(1.0 - search(&classes, eps)).log2()
    }

    #[test]
    fn drop_sweep_is_feasible_lower_bound() {
        let (p, q) = ([0.7, 0.3], [0.4, 0.6]);
        for eps in [0.02, 0.1, 0.3] {
            let exact = knapsack_dmin(p, q, 5, eps);
            let sweep = classical_smooth_dmin(&p, &q, 5, eps).unwrap().expect_finite("");
            assert!(sweep <= exact + 1e-12, "{sweep} > {exact}");
            assert!(sweep >= 0.8 * exact, "{sweep} vs {exact}");
        }
    }

    #[test]
    fn equal_states() {
        // The ball admits subnormalized states, so the exact smoothed D_max of
        // ρ against itself is log₂(1 − ε) and deleting mass ε lifts D_min to at
        // most −log₂(1 − ε); the gentle and projector bounds stay at 0.
        let rho = DensityOperator::from_diagonal(&[0.6, 0.4]).unwrap();
        let pair = IidPair::new(rho.clone(), rho).unwrap();
        for pt in rate_curve(&pair, 0.05, &[1, 2, 5, 8]).unwrap() {
            assert!((pt.dmax_over_n - 0.95f64.log2() / pt.n as f64).abs() < 1e-12, "{pt:?}");
            assert!(pt.dmin_over_n >= 0.0 && pt.dmin_over_n <= -0.95f64.log2() / pt.n as f64 + 1e-12);
            assert_eq!(pt.rel_entropy, 0.0);
        }
        for pt in rate_curve_with(&pair, 0.05, &[1, 2, 3], SpectralPath::Dense).unwrap() {
            assert!(pt.dmax_over_n >= -1e-12 && pt.dmin_over_n <= 1e-12, "{pt:?}");
        }
        let est: RateEstimate<f64> = divergence_rate_estimate(&pair, 0.05, 8).unwrap();
        assert!(est.sup_est.abs() <= 0.1 && est.inf_est.abs() <= 0.1);
    }

    #[test]
    fn benchmark_curve() {
        let pair = benchmark();
        let ns: Vec<usize> = (1..=10).collect();
        let curve = rate_curve(&pair, 0.05, &ns).unwrap();
        for pt in &curve {
            assert!((pt.rel_entropy - KL).abs() < 1e-12);
            assert!(pt.dmin_over_n <= KL + 1e-6, "{pt:?}");
            assert!(pt.dmax_over_n >= KL - 1e-6, "{pt:?}");
            assert!(pt.dmin_over_n <= pt.dmax_over_n + 1e-6);
        }
        assert!((curve[9].dmax_over_n - KL).abs() < (curve[0].dmax_over_n - KL).abs());
        for pt in &curve {
            let oracle = brute_dmax(&[0.75, 0.25], &[0.5, 0.5], pt.n, 0.05) / pt.n as f64;
            assert!((pt.dmax_over_n - oracle).abs() < 1e-9, "{pt:?} vs {oracle}");
        }
        // Two top classes (k = 10, 9) carry the excess: t = (A − ε)/B with
        // A = 0.75¹⁰ + 10·0.75⁹·0.25 and B = 11·2⁻¹⁰.
        let a = 0.75f64.powi(10) + 10.0 * 0.75f64.powi(9) * 0.25;
        let hand = ((a - 0.05) / (11.0 / 1024.0)).log2() / 10.0;
        let est = divergence_rate_estimate(&pair, 0.05, 10).unwrap();
        assert!((est.sup_est - hand).abs() < 1e-12, "{est:?} vs {hand}");
        assert!(est.inf_est <= est.sup_est + 1e-6);
    }

    #[test]
    fn fast_path_at_large_n() {
        let pt = rate_curve(&benchmark(), 0.05, &[200]).unwrap()[0];
        assert!(pt.dmin_over_n <= KL && KL <= pt.dmax_over_n, "{pt:?}");
        assert!(pt.dmax_over_n - KL < 0.1, "{pt:?}");
    }

    #[test]
    fn dense_curve_brackets_relative_entropy() {
        let pair = benchmark();
        for pt in rate_curve_with(&pair, 0.05, &[1, 2, 3, 4], SpectralPath::Dense).unwrap() {
            assert!(pt.dmin_over_n <= KL + 1e-3 && KL <= pt.dmax_over_n + 1e-3, "{pt:?}");
        }
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(rate_curve(&benchmark(), 0.0, &[1]).is_err());
        assert!(rate_curve(&benchmark(), 1.0, &[1]).is_err());
    }
}
