use crate::divergence::relative::{d_max, d_min};
use crate::divergence::value::DivergenceValue;
use crate::entanglement::BipartiteState;
use crate::error::{Error, Result};
use crate::operator::{trace_distance, DensityOperator, HermitianOperator, Subsystem};
use crate::scalar::{xlog2x, Real};

/// `H_min(ρ) = −log₂ ‖ρ‖_∞`.
pub fn h_min<T: Real>(rho: &DensityOperator<T>) -> T {
    -rho.max_eigenvalue().log2()
}

/// `H_max(ρ) = log₂ rank ρ`.
pub fn h_max<T: Real>(rho: &DensityOperator<T>) -> T {
    T::lit(rho.eig().support_rank() as f64).log2()
}

/// Von Neumann entropy `−Tr ρ log₂ ρ`.
pub fn von_neumann_entropy<T: Real>(rho: &DensityOperator<T>) -> T {
    -rho.eigenvalues().into_iter().fold(T::zero(), |acc, l| acc + xlog2x(l))
}

fn identity_tensor<T: Real>(rho_ab: &BipartiteState<T>, sigma_b: &DensityOperator<T>) -> Result<HermitianOperator<T>> {
    let (da, db) = rho_ab.dims();
    if sigma_b.dim() != db {
        return Err(Error::mismatch(format!(
            "sigma_B is {}-dim but the B factor is {db}-dim",
            sigma_b.dim()
        )));
    }
    Ok(HermitianOperator::identity(da).kron(sigma_b))
}

fn negate_finite<T: Real>(v: DivergenceValue<T>) -> Result<T> {
    v.bits().map(|x| -x).ok_or(Error::SupportViolation)
}

/// `H_min(A|B)_ρ|σ = −D_max(ρ_AB ‖ I_A ⊗ σ_B)`; a support violation (value `−∞`) is an error.
pub fn h_min_cond<T: Real>(rho_ab: &BipartiteState<T>, sigma_b: &DensityOperator<T>) -> Result<T> {
    let id_sigma = identity_tensor(rho_ab, sigma_b)?;
    negate_finite(d_max(rho_ab.state(), &id_sigma)?)
}

/// `H_max(A|B)_ρ|σ = log₂ Tr(π_AB (I_A ⊗ σ_B))`.
pub fn h_max_cond<T: Real>(rho_ab: &BipartiteState<T>, sigma_b: &DensityOperator<T>) -> Result<T> {
    let id_sigma = identity_tensor(rho_ab, sigma_b)?;
    negate_finite(d_min(rho_ab.state(), &id_sigma)?)
}

fn product_of_marginals<T: Real>(rho_ab: &BipartiteState<T>) -> HermitianOperator<T> {
    rho_ab.marginal(Subsystem::A).kron(&rho_ab.marginal(Subsystem::B))
}

/// `D_min(ρ_AB ‖ ρ_A ⊗ ρ_B)`.
pub fn mutual_min<T: Real>(rho_ab: &BipartiteState<T>) -> Result<DivergenceValue<T>> {
    d_min(rho_ab.state(), &product_of_marginals(rho_ab))
}

/// `D_max(ρ_AB ‖ ρ_A ⊗ ρ_B)`.
pub fn mutual_max<T: Real>(rho_ab: &BipartiteState<T>) -> Result<DivergenceValue<T>> {
    d_max(rho_ab.state(), &product_of_marginals(rho_ab))
}

/// Minimum error probability for equal priors, `½[1 − ½‖ρ − σ‖₁]`.
pub fn helstrom_min_error<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<T> {
    let half = T::lit(0.5);
    Ok(half * (T::one() - half * trace_distance(rho, sigma)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::maximally_entangled;
    use crate::operator::random::{random_density_with, random_pure_bipartite_with, seeded};
    use approx::assert_abs_diff_eq;

    fn diag(w: &[f64]) -> DensityOperator<f64> {
        DensityOperator::from_diagonal(w).unwrap()
    }

    #[test]
    fn unconditional_entropies() {
        let mm = DensityOperator::<f64>::maximally_mixed(4);
        assert_abs_diff_eq!(h_min(&mm), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h_max(&mm), 2.0, epsilon = 1e-12);
        let pure = diag(&[0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(h_min(&pure), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h_max(&pure), 0.0, epsilon = 1e-12);
        let r = diag(&[0.75, 0.25]);
        assert_abs_diff_eq!(h_min(&r), -(0.75f64).log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(h_max(&r), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn conditional_examples() {
        let sb = diag(&[0.3, 0.7]);
        let prod = BipartiteState::product(&DensityOperator::maximally_mixed(3), &sb);
        assert_abs_diff_eq!(h_min_cond(&prod, &sb).unwrap(), 3f64.log2(), epsilon = 1e-10);
        let b = maximally_entangled::<f64>(2);
        let half = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(h_min_cond(&b, &half).unwrap(), -1.0, epsilon = 1e-10);
        assert!(h_min_cond(&b, &DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn conditional_order() {
        let mut rng = seeded(4, 0);
        for _ in 0..30 {
            let rho = random_density_with::<f64, _>(6, 3, &mut rng).unwrap();
            let s = random_density_with(3, 3, &mut rng).unwrap();
            let st = BipartiteState::new(rho, (2, 3)).unwrap();
            assert!(h_min_cond(&st, &s).unwrap() <= h_max_cond(&st, &s).unwrap() + 1e-8);
        }
    }

    #[test]
    fn mutual_information_examples() {
        let mut rng = seeded(8, 0);
        let a = random_density_with::<f64, _>(2, 2, &mut rng).unwrap();
        let b = random_density_with::<f64, _>(3, 3, &mut rng).unwrap();
        let prod = BipartiteState::product(&a, &b);
        assert_abs_diff_eq!(mutual_max(&prod).unwrap().expect_finite("max"), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(mutual_min(&prod).unwrap().expect_finite("min"), 0.0, epsilon = 1e-9);
        let bs = maximally_entangled::<f64>(2);
        assert_abs_diff_eq!(mutual_max(&bs).unwrap().expect_finite("max"), 2.0, epsilon = 1e-10);
        for _ in 0..20 {
            let st = BipartiteState::new(random_pure_bipartite_with(2, 3, &mut rng).unwrap(), (2, 3)).unwrap();
            assert!(mutual_min(&st).unwrap().le_within(&mutual_max(&st).unwrap(), 1e-8));
        }
    }

    #[test]
    fn helstrom_examples() {
        let r = diag(&[0.9, 0.1]);
        assert_abs_diff_eq!(helstrom_min_error(&r, &r).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            helstrom_min_error(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            helstrom_min_error(&r, &diag(&[0.5, 0.5])).unwrap(),
            0.3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn entropy_of_bell_marginal() {
        let bs = maximally_entangled::<f64>(2);
        assert_abs_diff_eq!(von_neumann_entropy(&bs.marginal(Subsystem::A)), 1.0, epsilon = 1e-12);
    }
}
