use crate::divergence::relative::{d_max, d_min, overlap_bits};
use crate::divergence::DivergenceValue;
use crate::error::{Error, Result};
use crate::operator::{compare_projector, support_projector, DensityOperator, HermitianOperator, Relation};
use crate::scalar::Real;

pub const GAMMA_GRID: usize = 512;
/// Width added on each side of `[D_min, D_max]` when laying out the γ grid.
pub const GAMMA_MARGIN_BITS: f64 = 2.0;
/// Projected operators with trace below this are the zero operator.
const NEGLIGIBLE_TRACE: f64 = 1e-12;
pub const CLASSICAL_SUPPORT_LIMIT: usize = 20;
const BUDGET_TOL: f64 = 1e-12;

/// Lower bound on the smoothed `D_min` obtained from the best admissible
/// projection `P_γ = {ρ ≥ 2^γ σ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DminLowerBound<T> {
    pub value: DivergenceValue<T>,
    /// `None` when the unsmoothed `D_min` was the best candidate.
    pub gamma_bits: Option<T>,
    /// `Tr ρ − Tr(P_γ ρ)` at the chosen γ.
    pub delta: T,
}

/// Sweeps γ over a grid spanning `[D_min − 2, D_max + 2]` and keeps the
/// largest `D_min(P_γ ρ P_γ ‖ σ)` with `2√δ(γ) ≤ ε`, never going below the
/// unsmoothed `D_min`.
pub fn smooth_dmin_lower<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &HermitianOperator<T>,
    eps: T,
) -> Result<DminLowerBound<T>> {
    if !eps.is_finite() || eps <= T::zero() {
        return Err(Error::invalid("smoothing parameter must be positive and finite"));
    }
    let base = d_min(rho, sigma)?;
    let mut best = DminLowerBound {
        value: base,
        gamma_bits: None,
        delta: T::zero(),
    };
    let lo = match base {
        DivergenceValue::Finite(x) => x - T::lit(GAMMA_MARGIN_BITS),
        DivergenceValue::Infinite => return Ok(best),
    };
    let hi = match d_max(rho, sigma)? {
        DivergenceValue::Finite(x) => x + T::lit(GAMMA_MARGIN_BITS),
        DivergenceValue::Infinite => lo + T::lit(64.0),
    };
    let two = T::lit(2.0);
    let sigma_trace = sigma.trace();
    for k in 0..GAMMA_GRID {
        let gamma = lo + (hi - lo) * T::lit(k as f64 / (GAMMA_GRID - 1) as f64);
        let p = compare_projector(rho, &sigma.scale(two.powf(gamma)), Relation::Geq)?;
        let kept = p.inner(rho);
        let delta = (rho.trace() - kept).max(T::zero());
        if two * delta.sqrt() > eps || kept <= T::tol(NEGLIGIBLE_TRACE) {
            continue;
        }
        let projected = rho.conjugate(p.entries());
        let value = overlap_bits(support_projector(&projected).inner(sigma), sigma_trace);
        if value > best.value {
            best = DminLowerBound {
                value,
                gamma_bits: Some(gamma),
                delta,
            };
        }
    }
    Ok(best)
}

/// Exact smoothed `D_min` for commuting pairs given as weight vectors:
/// the best support obtainable by deleting at most `ε` of the mass of `p`.
pub fn smooth_dmin_exact_classical<T: Real>(p: &[T], q: &[T], eps: T) -> Result<DivergenceValue<T>> {
    if p.len() != q.len() {
        return Err(Error::mismatch(format!("p has {} entries, q has {}", p.len(), q.len())));
    }
    if p.iter().chain(q).any(|&x| x < T::zero() || !x.is_finite()) {
        return Err(Error::invalid("weights must be finite and non-negative"));
    }
    if eps < T::zero() {
        return Err(Error::invalid("smoothing parameter must be non-negative"));
    }
    let total = p.iter().fold(T::zero(), |a, &x| a + x);
    if total > T::one() + T::tol(BUDGET_TOL) || total <= T::zero() {
        return Err(Error::InvalidTrace { trace: total.as_f64() });
    }
    let support: Vec<usize> = (0..p.len()).filter(|&i| p[i] > T::zero()).collect();
    if support.len() > CLASSICAL_SUPPORT_LIMIT {
        return Err(Error::SizeGuard(format!(
            "support of size {} exceeds the enumeration limit {CLASSICAL_SUPPORT_LIMIT}",
            support.len()
        )));
    }
    let budget = eps + T::tol(BUDGET_TOL);
    let q_total = q.iter().fold(T::zero(), |a, &x| a + x);
    let mut best: Option<DivergenceValue<T>> = None;
    for mask in 1u32..(1u32 << support.len()) {
        let (mut dropped, mut overlap) = (T::zero(), T::zero());
        for (bit, &i) in support.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                overlap += q[i];
            } else {
                dropped += p[i];
            }
        }
        if dropped > budget {
            continue;
        }
        let value = overlap_bits(overlap, q_total);
        if best.is_none_or(|b| value > b) {
            best = Some(value);
        }
    }
    Ok(best.expect("the full support is always admissible"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::random::{random_density_with, seeded};
    use approx::assert_abs_diff_eq;

    fn fin(v: DivergenceValue<f64>) -> f64 {
        v.expect_finite("test")
    }

    #[test]
    fn classical_examples() {
        let q = [0.5, 0.5];
        assert_abs_diff_eq!(
            fin(smooth_dmin_exact_classical(&[0.9, 0.1], &q, 0.0).unwrap()),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(fin(smooth_dmin_exact_classical(&[0.9, 0.1], &q, 0.25).unwrap()), 1.0);
        let v = smooth_dmin_exact_classical(&[0.5, 0.3, 0.2], &[0.1, 0.45, 0.45], 0.5).unwrap();
        assert_abs_diff_eq!(fin(v), -(0.1f64).log2(), epsilon = 1e-12);
        let partial = smooth_dmin_exact_classical(&[0.6, 0.4, 0.0], &[0.2, 0.3, 0.5], 0.0).unwrap();
        assert_abs_diff_eq!(fin(partial), -(0.5f64).log2(), epsilon = 1e-12);
    }

    #[test]
    fn classical_guards() {
        assert!(smooth_dmin_exact_classical(&[0.05; 21], &[0.04; 21], 0.1).is_err());
        assert!(smooth_dmin_exact_classical(&[0.9, 0.2], &[0.5, 0.5], 0.1).is_err());
        assert!(smooth_dmin_exact_classical(&[0.9, 0.1], &[0.5], 0.1).is_err());
    }

    #[test]
    fn sweep_drops_small_branch() {
        let rho = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let sigma = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
        let r = smooth_dmin_lower(&rho, &sigma, 0.75).unwrap();
        assert_abs_diff_eq!(fin(r.value), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.delta, 0.1, epsilon = 1e-12);
        let tight = smooth_dmin_lower(&rho, &sigma, 0.6).unwrap();
        assert_abs_diff_eq!(fin(tight.value), 0.0, epsilon = 1e-12);
        assert!(tight.gamma_bits.is_none());
    }

    #[test]
    fn sweep_below_classical_exact() {
        for seed in 0..30 {
            let mut rng = seeded(seed, 2);
            let p = crate::operator::random::random_simplex_with(4, &mut rng);
            let q = crate::operator::random::random_simplex_with(4, &mut rng);
            let eps = 0.1 + 0.2 * (seed % 5) as f64;
            let rho = DensityOperator::from_diagonal(&p).unwrap();
            let sigma = HermitianOperator::from_real_diagonal(&q);
            let lower = smooth_dmin_lower(&rho, &sigma, eps).unwrap().value;
            let exact = smooth_dmin_exact_classical(&p, &q, eps).unwrap();
            assert!(lower.le_within(&exact, 1e-9), "seed {seed}");
            assert!(d_min(&rho, &sigma).unwrap().le_within(&lower, 0.0));
        }
    }

    #[test]
    fn sweep_never_below_unsmoothed() {
        for seed in 0..20 {
            let mut rng = seeded(seed, 3);
            let rho = random_density_with::<f64, _>(3, 2, &mut rng).unwrap();
            let sigma = random_density_with::<f64, _>(3, 3, &mut rng).unwrap();
            let base = d_min(&rho, &sigma).unwrap();
            let r = smooth_dmin_lower(&rho, &sigma, 2.5).unwrap();
            assert!(base.le_within(&r.value, 0.0));
        }
    }
}
