use std::ops::Deref;

use crate::error::{Error, Result};
use crate::operator::hermitian::{HermitianOperator, ZERO_EIGEN_TOL};
use crate::scalar::Real;

/// Which side of zero a spectral projection keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Geq,
    Gt,
    Leq,
    Lt,
}

impl Relation {
    fn keeps<T: Real>(self, lambda: T, zero_tol: T) -> bool {
        let zero = lambda.abs() <= zero_tol;
        match self {
            Relation::Geq => zero || lambda > T::zero(),
            Relation::Gt => !zero && lambda > T::zero(),
            Relation::Leq => zero || lambda < T::zero(),
            Relation::Lt => !zero && lambda < T::zero(),
        }
    }
}

/// Orthogonal projector together with its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector<T: Real> {
    op: HermitianOperator<T>,
    rank: usize,
}

impl<T: Real> Projector<T> {
    pub fn identity(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim),
            rank: dim,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn op(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator<T> {
        self.op
    }

    /// `I − P`.
    pub fn complement(&self) -> Self {
        let d = self.op.dim();
        Self {
            op: &HermitianOperator::identity(d) - &self.op,
            rank: d - self.rank,
        }
    }
}

impl<T: Real> Deref for Projector<T> {
    type Target = HermitianOperator<T>;
    fn deref(&self) -> &HermitianOperator<T> {
        &self.op
    }
}

/// `{A ≥ 0}`-style projection of a single self-adjoint operator.
pub fn spectral_projector<T: Real>(a: &HermitianOperator<T>, relation: Relation) -> Projector<T> {
    let zero_tol = T::tol(ZERO_EIGEN_TOL);
    let (op, rank) = a.eig().projector_where(|l| relation.keeps(l, zero_tol));
    Projector { op, rank }
}

/// `{A ≥ B}` and friends: projection onto eigenvectors of `A − B`
/// whose eigenvalues satisfy `relation` against zero.
pub fn compare_projector<T: Real>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
    relation: Relation,
) -> Result<Projector<T>> {
    if a.dim() != b.dim() {
        return Err(Error::mismatch(format!(
            "cannot compare {}-dim and {}-dim operators",
            a.dim(),
            b.dim()
        )));
    }
    Ok(spectral_projector(&(a - b), relation))
}

/// Projector onto the support of a positive operator.
pub fn support_projector<T: Real>(rho: &HermitianOperator<T>) -> Projector<T> {
    let spec = rho.eig();
    let cut = spec.support_cutoff();
    let (op, rank) = spec.projector_where(|l| l > cut && l > T::zero());
    Projector { op, rank }
}
