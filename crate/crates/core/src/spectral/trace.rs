use serde::Serialize;

use crate::error::Result;
use crate::operator::{compare_projector, Relation};
use crate::scalar::Real;
use crate::spectral::pair::{tensor_power, IidPair};
use crate::spectral::types::{above, type_classes};

/// Slack allowed on the Lemma 2 bound.
pub const LEMMA2_TOL: f64 = 1e-9;

/// How a spectral quantity is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralPath {
    /// Type classes when the pair commutes, dense matrices otherwise.
    #[default]
    Auto,
    Dense,
    /// Type-class sums; commuting pairs only.
    Classical,
}

impl SpectralPath {
    pub(crate) fn classical<T: Real>(self, pair: &IidPair<T>) -> bool {
        match self {
            SpectralPath::Auto => pair.commuting(),
            SpectralPath::Dense => false,
            SpectralPath::Classical => true,
        }
    }
}

/// `(Tr[P ρ^⊗n], Tr[P σ^⊗n])` for `P = {ρ^⊗n ≥ 2^{nγ} σ^⊗n}`.
fn projected_masses<T: Real>(pair: &IidPair<T>, n: usize, gamma_bits: T, path: SpectralPath) -> Result<(T, T)> {
    if path.classical(pair) {
        let (p, q) = pair.require_joint()?;
        let (mut rho_mass, mut sigma_mass) = (T::zero(), T::zero());
        for class in type_classes(p, q, n)? {
            if above(&class, n, gamma_bits) {
                rho_mass += class.p_mass();
                sigma_mass += class.q_mass();
            }
        }
        return Ok((rho_mass, sigma_mass));
    }
    let rho_n = tensor_power(pair.rho(), n)?;
    let sigma_n = tensor_power(pair.sigma(), n)?;
    let scale = T::lit(2.0).powf(T::lit(n as f64) * gamma_bits);
    let proj = compare_projector(&rho_n, &sigma_n.scale(scale), Relation::Geq)?;
    Ok((proj.inner(&rho_n), proj.inner(&sigma_n)))
}

/// `Tr[{ρ^⊗n ≥ 2^{nγ} σ^⊗n} ρ^⊗n]`, clipped to `[0, 1]`.
pub fn spectral_trace<T: Real>(pair: &IidPair<T>, n: usize, gamma_bits: T) -> Result<T> {
    spectral_trace_with(pair, n, gamma_bits, SpectralPath::Auto)
}

pub fn spectral_trace_with<T: Real>(pair: &IidPair<T>, n: usize, gamma_bits: T, path: SpectralPath) -> Result<T> {
    let (rho_mass, _) = projected_masses(pair, n, gamma_bits, path)?;
    Ok(rho_mass.max(T::zero()).min(T::one()))
}

/// `Tr[{ρ^⊗n ≥ 2^{nγ} σ^⊗n} σ^⊗n]` against its bound `2^{−nγ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma2Check<T> {
    pub lhs: T,
    pub bound: T,
}

impl<T: Real> Lemma2Check<T> {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound + T::tol(LEMMA2_TOL)
    }

    pub fn violation(&self) -> T {
        (self.lhs - self.bound).max(T::zero())
    }
}

pub fn lemma2_bound_check<T: Real>(pair: &IidPair<T>, n: usize, gamma_bits: T) -> Result<Lemma2Check<T>> {
    lemma2_bound_check_with(pair, n, gamma_bits, SpectralPath::Auto)
}

pub fn lemma2_bound_check_with<T: Real>(
    pair: &IidPair<T>,
    n: usize,
    gamma_bits: T,
    path: SpectralPath,
) -> Result<Lemma2Check<T>> {
    let (_, sigma_mass) = projected_masses(pair, n, gamma_bits, path)?;
    Ok(Lemma2Check {
        lhs: sigma_mass.max(T::zero()),
        bound: T::lit(2.0).powf(-T::lit(n as f64) * gamma_bits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::random::{random_density_with, random_unitary_with, seeded};
    use crate::operator::{DensityOperator, HermitianOperator};

    fn benchmark() -> IidPair<f64> {
        IidPair::new(
            DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap(),
            DensityOperator::from_diagonal(&[0.5, 0.5]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn extreme_thresholds() {
        let pair = benchmark();
        for path in [SpectralPath::Dense, SpectralPath::Classical] {
            assert!((spectral_trace_with(&pair, 3, -60.0, path).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(spectral_trace_with(&pair, 3, 60.0, path).unwrap(), 0.0);
        }
    }

    #[test]
    fn four_outcome_oracle() {
        // Sequences (x₁, x₂) with mean log-ratio ≥ 0.3: only (0, 0), mass 9/16.
        let pair = benchmark();
        for path in [SpectralPath::Dense, SpectralPath::Classical] {
            let v = spectral_trace_with(&pair, 2, 0.3, path).unwrap();
            assert!((v - 9.0 / 16.0).abs() < 1e-12, "{path:?} {v}");
        }
    }

    #[test]
    fn lemma2_examples() {
        let pair = benchmark();
        let c = lemma2_bound_check(&pair, 1, 0.0).unwrap();
        assert!(c.lhs <= 1.0 && c.holds());
        let c = lemma2_bound_check(&pair, 1, 0.3).unwrap();
        assert!((c.lhs - 0.5).abs() < 1e-12);
        assert!((c.bound - 2f64.powf(-0.3)).abs() < 1e-12);
        assert!(c.holds());
    }

    #[test]
    fn lemma2_on_noncommuting_pairs() {
        let mut rng = seeded(41, 0);
        for _ in 0..5 {
            let pair = IidPair::new(
                random_density_with::<f64, _>(2, 2, &mut rng).unwrap(),
                random_density_with::<f64, _>(2, 2, &mut rng).unwrap(),
            )
            .unwrap();
            for gamma in [-1.0, 0.0, 0.5, 2.0] {
                assert!(lemma2_bound_check(&pair, 2, gamma).unwrap().holds());
            }
        }
    }

    #[test]
    fn paths_agree_on_commuting_pairs() {
        let mut rng = seeded(42, 0);
        let u = random_unitary_with::<f64, _>(2, &mut rng);
        let rho = DensityOperator::new(HermitianOperator::from_real_diagonal(&[0.8, 0.2]).conjugate(&u)).unwrap();
        let sigma = DensityOperator::new(HermitianOperator::from_real_diagonal(&[0.35, 0.65]).conjugate(&u)).unwrap();
        let pair = IidPair::new(rho, sigma).unwrap();
        for n in 1..=8 {
            for gamma in [-0.7, -0.1, 0.2, 0.9] {
                let d = spectral_trace_with(&pair, n, gamma, SpectralPath::Dense).unwrap();
                let c = spectral_trace_with(&pair, n, gamma, SpectralPath::Classical).unwrap();
                assert!((d - c).abs() < 1e-8, "n={n} γ={gamma}: {d} vs {c}");
            }
        }
    }

    #[test]
    fn classical_path_rejects_noncommuting() {
        let mut rng = seeded(43, 0);
        let pair = IidPair::new(
            random_density_with::<f64, _>(2, 2, &mut rng).unwrap(),
            random_density_with::<f64, _>(2, 2, &mut rng).unwrap(),
        )
        .unwrap();
        assert!(spectral_trace_with(&pair, 2, 0.0, SpectralPath::Classical).is_err());
    }

    #[test]
    fn large_block_via_fast_path() {
        let v = spectral_trace(&benchmark(), 2000, 0.0).unwrap();
        assert!(v > 0.99);
        assert!(lemma2_bound_check(&benchmark(), 2000, 0.1).unwrap().holds());
    }
}
