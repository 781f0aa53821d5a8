//! Matrix functions evaluated through the spectral decomposition.
//!
//! Functions that are singular at zero (inverse powers, logarithms) act on
//! the support only and vanish on the kernel.

use crate::error::{Error, Result};
use crate::operator::density::DENSITY_EIGEN_TOL;
use crate::operator::hermitian::HermitianOperator;
use crate::scalar::Real;

fn check_psd<T: Real>(min: T) -> Result<()> {
    if min < -T::tol(DENSITY_EIGEN_TOL) {
        Err(Error::NegativeEigenvalue { value: min.as_f64() })
    } else {
        Ok(())
    }
}

/// `σ^{-1/2}` on `supp σ`, zero on the kernel.
pub fn generalized_inverse_sqrt<T: Real>(sigma: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let spec = sigma.eig();
    check_psd(spec.min())?;
    Ok(spec.map_on_support(|l| T::one() / l.sqrt()))
}

/// Principal square root of a positive operator (tiny negative eigenvalues clipped).
pub fn sqrt_psd<T: Real>(a: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let spec = a.eig();
    check_psd(spec.min())?;
    Ok(spec.map(|l| l.max(T::zero()).sqrt()))
}

/// `A^p` on the support; for `p = 0` this is the support projector.
pub fn power_on_support<T: Real>(a: &HermitianOperator<T>, p: T) -> Result<HermitianOperator<T>> {
    let spec = a.eig();
    check_psd(spec.min())?;
    Ok(spec.map_on_support(|l| l.powf(p)))
}

/// `log₂ A` on the support.
pub fn log2_on_support<T: Real>(a: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let spec = a.eig();
    check_psd(spec.min())?;
    Ok(spec.map_on_support(|l| l.log2()))
}

/// Euclidean projection onto the positive cone (eigenvalue clipping).
pub fn project_psd<T: Real>(a: &HermitianOperator<T>) -> HermitianOperator<T> {
    a.positive_part()
}
