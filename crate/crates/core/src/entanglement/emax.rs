use serde::Serialize;

use crate::divergence::relative::{d_max, relative_entropy};
use crate::entanglement::ppt::{ppt_emax_lower, PPT_MAX_DIM};
use crate::entanglement::separable::{
    caratheodory, decompose, minimize, with_barrier, SearchConfig, SeparableObjective, BARRIER_WEIGHT,
};
use crate::entanglement::state::{BipartiteState, SeparableEnsemble};
use crate::error::{Error, Result};
use crate::operator::random::seeded;
use crate::operator::{CMatrix, HermitianOperator};
use crate::scalar::{creal, xlog2x, Real};

/// Soft-max sharpness (in nats) used to smooth `log μ_max` for gradients.
const SOFTMAX_SHARPNESS: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmaxConfig {
    pub terms: usize,
    pub restarts: usize,
    pub seed: u64,
    pub iters: usize,
}

impl EmaxConfig {
    /// Defaults for a `dA × dB` system: `(dA dB)²` terms, 3 restarts, 300 iterations.
    pub fn for_dims(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        Self {
            terms: n * n,
            restarts: 3,
            seed: 0,
            iters: 300,
        }
    }

    fn search(&self) -> SearchConfig {
        SearchConfig {
            terms: self.terms.max(1),
            restarts: self.restarts.max(1),
            iters: self.iters,
        }
    }
}

/// Two-sided estimate of `E_max` with an explicit separable witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmaxResult<T: Real> {
    /// `D_max(ρ ‖ witness)`.
    pub upper_bits: T,
    /// Certified PPT lower bound (zero when the PPT bound is unavailable).
    pub lower_bits: T,
    pub witness: SeparableEnsemble<T>,
    pub gap: T,
    /// Weight of the maximally mixed admixture inside `witness`.
    pub barrier_weight: T,
    /// Whether `lower_bits` comes from the PPT relaxation.
    pub ppt_certified: bool,
}

struct DmaxObjective<'a, T: Real> {
    rho: &'a HermitianOperator<T>,
}

impl<T: Real> SeparableObjective<T> for DmaxObjective<'_, T> {
    fn value(&self, sigma: &HermitianOperator<T>) -> Option<T> {
        let spec = sigma.eig();
        if spec.min() <= T::zero() {
            return None;
        }
        let s = spec.map(|l| T::one() / l.sqrt());
        let mu = self.rho.conjugate(s.entries()).max_eigenvalue();
        (mu > T::zero()).then(|| mu.log2())
    }

    /// `−Σ πᵢ vᵢvᵢ† / ln 2` over σ-normalized generalized eigenvectors, with
    /// soft-max weights `πᵢ ∝ μᵢ^β`.
    fn gradient(&self, sigma: &HermitianOperator<T>) -> HermitianOperator<T> {
        let s = sigma.eig().map(|l| T::one() / l.max(T::default_epsilon()).sqrt());
        let m = self.rho.conjugate(s.entries()).eig();
        let top = m.max();
        let beta = T::lit(SOFTMAX_SHARPNESS);
        let weights: Vec<T> = m
            .eigenvalues
            .iter()
            .map(|&mu| {
                if mu > T::zero() {
                    (beta * (mu / top).ln()).exp()
                } else {
                    T::zero()
                }
            })
            .collect();
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        let n = sigma.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (i, &w) in weights.iter().enumerate() {
            if w <= T::lit(1e-16) * total {
                continue;
            }
            let v = s.entries() * m.vector(i);
            acc += (&v * v.adjoint()) * creal(w / total);
        }
        HermitianOperator::hermitize(acc).scale(-T::one() / T::lit(2f64.ln()))
    }
}

struct RelEntObjective<'a, T: Real> {
    rho: &'a HermitianOperator<T>,
    neg_entropy: T,
}

impl<T: Real> SeparableObjective<T> for RelEntObjective<'_, T> {
    fn value(&self, sigma: &HermitianOperator<T>) -> Option<T> {
        let spec = sigma.eig();
        if spec.min() <= T::zero() {
            return None;
        }
        let log_sigma = spec.map(|l| l.log2());
        Some(self.neg_entropy - self.rho.inner(&log_sigma))
    }

    /// `−D log₂(σ)[ρ]`, via divided differences of `ln` in the eigenbasis of `σ`.
    fn gradient(&self, sigma: &HermitianOperator<T>) -> HermitianOperator<T> {
        let spec = sigma.eig();
        let u = &spec.eigenvectors;
        let r = u.adjoint() * self.rho.entries() * u;
        let s: Vec<T> = spec.eigenvalues.iter().map(|&l| l.max(T::default_epsilon())).collect();
        let n = s.len();
        let ln2 = T::lit(2f64.ln());
        let g = CMatrix::from_fn(n, n, |k, l| {
            let (x, y) = (s[k], s[l]);
            let dd = if (x - y).abs() <= T::lit(1e-12) * x.max(y) {
                T::one() / x
            } else {
                (x.ln() - y.ln()) / (x - y)
            };
            r[(k, l)] * creal(-dd / ln2)
        });
        HermitianOperator::hermitize(u * g * u.adjoint())
    }
}

/// Gap below which the decomposition route is accepted without a direct search.
const DECOMPOSITION_GAP: f64 = 5e-3;

/// Interior shifts `η` tried when decomposing the PPT optimum.
const SHIFTS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Separable decompositions of `(σ* + η I)/(1 + dη)` for the PPT-optimal `σ*`.
///
/// When PPT and separability coincide the shifted target is an interior
/// point of the separable set, so the Frank–Wolfe decomposition converges
/// quickly and `D_max(ρ‖·)` lands within `O(η)` of the PPT bound.
fn ppt_decompositions<T: Real, R: rand::Rng + ?Sized>(
    sigma: &HermitianOperator<T>,
    dims: (usize, usize),
    config: &EmaxConfig,
    rng: &mut R,
) -> Result<Vec<SeparableEnsemble<T>>> {
    let n = sigma.dim();
    let mut warm = Vec::new();
    let mut out = Vec::new();
    for &eta in &SHIFTS {
        let eta = T::lit(eta);
        let norm = T::one() + eta * T::lit(n as f64);
        let target = (sigma + &HermitianOperator::identity(n).scale(eta)).scale(T::one() / norm);
        let tol = eta / (T::lit(2.0) * norm);
        let dec = decompose(&target, dims, &warm, config.iters.max(1), tol, rng);
        warm = dec.parts.clone();
        let mut parts = caratheodory(dec.parts);
        if parts.len() > config.terms.max(1) {
            parts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
            parts.truncate(config.terms.max(1));
        }
        out.push(with_barrier(dims, parts)?);
    }
    Ok(out)
}

/// `E_max(ρ) = min_{σ separable} D_max(ρ‖σ)`: upper bound from a separable
/// search, lower bound from the PPT relaxation.
pub fn emax<T: Real>(rho: &BipartiteState<T>, config: &EmaxConfig) -> Result<EmaxResult<T>> {
    rho.require_entangleable()?;
    let dims = rho.dims();
    let op = rho.state().op();
    let mut rng = seeded(config.seed, 0x454d4158);
    let mut best: Option<(T, SeparableEnsemble<T>)> = None;
    let consider = |best: &mut Option<(T, SeparableEnsemble<T>)>, ensemble: SeparableEnsemble<T>| -> Result<()> {
        if let Some(bits) = d_max(op, &ensemble.assemble())?.bits() {
            if best.as_ref().is_none_or(|b| bits < b.0) {
                *best = Some((bits, ensemble));
            }
        }
        Ok(())
    };
    let (lower_bits, ppt_certified) = if op.dim() <= PPT_MAX_DIM {
        let ppt = ppt_emax_lower(rho)?;
        for ensemble in ppt_decompositions(&ppt.sigma, dims, config, &mut rng)? {
            consider(&mut best, ensemble)?;
        }
        (ppt.lower_bits, true)
    } else {
        (T::zero(), false)
    };
    let close = |b: &Option<(T, SeparableEnsemble<T>)>| {
        ppt_certified
            && b.as_ref()
                .is_some_and(|b| b.0 - lower_bits <= T::lit(DECOMPOSITION_GAP))
    };
    if !close(&best) {
        let objective = DmaxObjective { rho: op };
        let outcome = minimize(&objective, dims, &config.search(), &[], &mut rng)?;
        consider(&mut best, outcome.ensemble)?;
    }
    let (upper_bits, witness) =
        best.ok_or_else(|| Error::Certificate("witness does not cover the support of rho".into()))?;
    Ok(EmaxResult {
        upper_bits,
        lower_bits,
        gap: (upper_bits - lower_bits).max(T::zero()),
        witness,
        barrier_weight: T::lit(BARRIER_WEIGHT),
        ppt_certified,
    })
}

/// Upper estimate of the relative entropy of entanglement with its witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReeResult<T: Real> {
    pub value_bits: T,
    pub witness: SeparableEnsemble<T>,
}

/// `min_{σ separable} S(ρ‖σ)` by the same separable search.
pub fn rel_ent_entanglement<T: Real>(rho: &BipartiteState<T>, config: &EmaxConfig) -> Result<ReeResult<T>> {
    rho.require_entangleable()?;
    let op = rho.state().op();
    let neg_entropy = op.eigenvalues().into_iter().fold(T::zero(), |a, l| a + xlog2x(l));
    let objective = RelEntObjective { rho: op, neg_entropy };
    let mut rng = seeded(config.seed, 0x52454521);
    let outcome = minimize(&objective, rho.dims(), &config.search(), &[], &mut rng)?;
    let value_bits = relative_entropy(op, &outcome.ensemble.assemble())?
        .bits()
        .ok_or_else(|| Error::Certificate("witness does not cover the support of rho".into()))?;
    Ok(ReeResult {
        value_bits,
        witness: outcome.ensemble,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::von_neumann_entropy;
    use crate::entanglement::state::maximally_entangled;
    use crate::operator::random::{random_density_with, random_pure_bipartite_with, random_pure_vector_with};
    use crate::operator::{DensityOperator, Subsystem};

    fn cfg() -> EmaxConfig {
        EmaxConfig {
            restarts: 2,
            ..EmaxConfig::for_dims((2, 2))
        }
    }

    #[test]
    fn bell_state() {
        let bell = maximally_entangled::<f64>(2);
        let r = emax(&bell, &cfg()).unwrap();
        assert!((0.99..=1.01).contains(&r.upper_bits), "{}", r.upper_bits);
        assert!((0.99..=1.01).contains(&r.lower_bits), "{}", r.lower_bits);
        assert!(r.gap <= 1e-2);
        let again = d_max(bell.state(), &r.witness.assemble()).unwrap().expect_finite("");
        assert!((again - r.upper_bits).abs() <= 1e-8);
        let ree = rel_ent_entanglement(&bell, &cfg()).unwrap();
        assert!((ree.value_bits - 1.0).abs() <= 1e-2, "{}", ree.value_bits);
    }

    #[test]
    fn product_pure_state_is_free() {
        let mut rng = seeded(3, 0);
        let a = DensityOperator::pure(&random_pure_vector_with::<f64, _>(2, &mut rng)).unwrap();
        let b = DensityOperator::pure(&random_pure_vector_with::<f64, _>(2, &mut rng)).unwrap();
        let r = emax(&BipartiteState::product(&a, &b), &cfg()).unwrap();
        assert!(r.upper_bits <= 1e-3, "{}", r.upper_bits);
        assert!(r.lower_bits >= -1e-6);
    }

    #[test]
    fn pure_state_ree_is_entanglement_entropy() {
        let mut rng = seeded(9, 0);
        let psi = BipartiteState::new(random_pure_bipartite_with::<f64, _>(2, 2, &mut rng).unwrap(), (2, 2)).unwrap();
        let oracle = von_neumann_entropy(&psi.marginal(Subsystem::A));
        let ree = rel_ent_entanglement(&psi, &cfg()).unwrap();
        assert!(
            (ree.value_bits - oracle).abs() <= 1e-2,
            "{} vs {oracle}",
            ree.value_bits
        );
        let e = emax(&psi, &cfg()).unwrap();
        assert!(ree.value_bits <= e.upper_bits + 1e-3);
    }

    #[test]
    fn random_mixed_ordering() {
        let mut rng = seeded(10, 0);
        for _ in 0..3 {
            let st = BipartiteState::new(random_density_with::<f64, _>(4, 2, &mut rng).unwrap(), (2, 2)).unwrap();
            let e = emax(&st, &cfg()).unwrap();
            let ree = rel_ent_entanglement(&st, &cfg()).unwrap();
            assert!(e.lower_bits <= e.upper_bits + 1e-6);
            assert!(
                ree.value_bits <= e.upper_bits + 1e-3,
                "{} vs {}",
                ree.value_bits,
                e.upper_bits
            );
        }
    }
}
