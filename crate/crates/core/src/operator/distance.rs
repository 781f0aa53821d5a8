use crate::error::{Error, Result};
use crate::operator::calculus::power_on_support;
use crate::operator::density::DensityOperator;
use crate::operator::hermitian::HermitianOperator;
use crate::operator::projector::{compare_projector, Relation};
use crate::scalar::Real;

fn same_dim<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::mismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `‖A − B‖₁ = Σ |λᵢ(A − B)|`.
pub fn trace_distance<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<T> {
    same_dim(a, b)?;
    Ok((a - b).trace_norm())
}

/// `Tr[{A≥B}(A−B)] − Tr[{A<B}(A−B)]`, the two-projector form of the trace norm.
pub fn trace_distance_projector_form<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<T> {
    let diff = a - b;
    let pos = compare_projector(a, b, Relation::Geq)?;
    let neg = compare_projector(a, b, Relation::Lt)?;
    Ok(pos.inner(&diff) - neg.inner(&diff))
}

/// `F(ρ, ρ′) = Tr √(ρ^{1/2} ρ′ ρ^{1/2})`; defined for normalized states only.
pub fn fidelity<T: Real>(rho: &DensityOperator<T>, rho_prime: &DensityOperator<T>) -> Result<T> {
    same_dim(rho, rho_prime)?;
    if !rho.is_normalized() || !rho_prime.is_normalized() {
        return Err(Error::invalid("fidelity requires normalized states"));
    }
    // ‖√ρ √ρ'‖₁ from singular values, which stay accurate when either state is rank deficient
    let half = T::lit(0.5);
    let product = power_on_support(rho, half)?.entries() * power_on_support(rho_prime, half)?.entries();
    let f = product.singular_values().iter().fold(T::zero(), |acc, &s| acc + s);
    Ok(f.min(T::one()))
}
