use std::ops::Deref;

use crate::error::{Error, Result};
use crate::operator::hermitian::{CVector, HermitianOperator};
use crate::scalar::Real;

/// Eigenvalues above `-DENSITY_EIGEN_TOL` are accepted as non-negative.
pub const DENSITY_EIGEN_TOL: f64 = 1e-10;
/// `|Tr ρ − 1|` below this marks a state as normalized.
pub const NORMALIZED_TOL: f64 = 1e-10;

/// Positive operator with trace in `(0, 1]`.
///
/// Subnormalized operators are first-class: the smoothing ball contains
/// them, so only fidelity insists on `normalized`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<T: Real> {
    op: HermitianOperator<T>,
    trace: T,
    normalized: bool,
}

impl<T: Real> DensityOperator<T> {
    pub fn new(op: HermitianOperator<T>) -> Result<Self> {
        let min = op.min_eigenvalue();
        if min < -T::tol(DENSITY_EIGEN_TOL) {
            return Err(Error::NegativeEigenvalue { value: min.as_f64() });
        }
        let trace = op.trace();
        if trace <= T::zero() || trace > T::one() + T::tol(NORMALIZED_TOL) {
            return Err(Error::InvalidTrace { trace: trace.as_f64() });
        }
        let normalized = (trace - T::one()).abs() <= T::tol(NORMALIZED_TOL);
        Ok(Self { op, trace, normalized })
    }

    /// Wraps an operator known to be positive with trace in `(0, 1]`, such as
    /// a tensor product of states, without an eigendecomposition.
    pub(crate) fn new_trusted(op: HermitianOperator<T>) -> Self {
        let trace = op.trace();
        let normalized = (trace - T::one()).abs() <= T::tol(NORMALIZED_TOL);
        Self { op, trace, normalized }
    }

    /// Divides a non-zero positive operator by its trace.
    pub fn normalize_from(op: HermitianOperator<T>) -> Result<Self> {
        let tr = op.trace();
        if tr <= T::zero() {
            return Err(Error::InvalidTrace { trace: tr.as_f64() });
        }
        Self::new(op.scale(T::one() / tr))
    }

    pub fn from_diagonal(weights: &[T]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(weights))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::lit(dim as f64);
        Self::new(HermitianOperator::identity(dim).scale(w)).expect("I/d is a state")
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &CVector<T>) -> Result<Self> {
        Self::normalize_from(HermitianOperator::ket_bra(psi))
    }

    pub fn op(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator<T> {
        self.op
    }

    pub fn trace(&self) -> T {
        self.trace
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// The state `ρ / Tr ρ`.
    pub fn normalized(&self) -> Self {
        Self::normalize_from(self.op.clone()).expect("positive trace")
    }
}

impl<T: Real> Deref for DensityOperator<T> {
    type Target = HermitianOperator<T>;
    fn deref(&self) -> &HermitianOperator<T> {
        &self.op
    }
}

impl<T: Real> AsRef<HermitianOperator<T>> for DensityOperator<T> {
    fn as_ref(&self) -> &HermitianOperator<T> {
        &self.op
    }
}
