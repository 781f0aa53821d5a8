use serde::Serialize;

use crate::divergence::relative::{chernoff_bound, d_max, d_min, relative_entropy};
use crate::divergence::value::DivergenceValue;
use crate::error::Result;
use crate::operator::HermitianOperator;
use crate::scalar::Real;

pub const SANDWICH_TOL: f64 = 1e-9;

/// The four core divergences of a pair plus the `D_min ≤ S ≤ D_max` check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivergenceReport<T: Real> {
    pub d_min: DivergenceValue<T>,
    pub d_max: DivergenceValue<T>,
    pub rel_entropy: DivergenceValue<T>,
    pub chernoff: DivergenceValue<T>,
    pub sandwich_ok: bool,
}

impl<T: Real> DivergenceReport<T> {
    pub fn evaluate(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<Self> {
        let d_min = d_min(rho, sigma)?;
        let d_max = d_max(rho, sigma)?;
        let rel_entropy = relative_entropy(rho, sigma)?;
        let chernoff = chernoff_bound(rho, sigma)?;
        let tol = T::tol(SANDWICH_TOL);
        let sandwich_ok = d_min.le_within(&rel_entropy, tol) && rel_entropy.le_within(&d_max, tol);
        Ok(Self {
            d_min,
            d_max,
            rel_entropy,
            chernoff,
            sandwich_ok,
        })
    }
}
