use crate::error::{Error, Result};
use crate::operator::{tensor, CMatrix, DensityOperator, HermitianOperator};
use crate::scalar::{cplx, Real};

/// `‖[ρ, σ]‖_∞` at or below this counts as commuting.
pub const COMMUTING_TOL: f64 = 1e-10;
/// Largest dimension of a dense tensor power.
pub const DENSE_MAX_DIM: usize = 4096;
/// Eigenvalues of `σ` closer than this share an eigenspace when diagonalizing jointly.
const CLUSTER_TOL: f64 = 1e-9;

/// A pair of states generating the i.i.d. sequences `ρ^⊗n`, `σ^⊗n`.
#[derive(Clone, Debug, PartialEq)]
pub struct IidPair<T: Real> {
    rho: DensityOperator<T>,
    sigma: DensityOperator<T>,
    commuting: bool,
    joint: Option<(Vec<T>, Vec<T>)>,
}

impl<T: Real> IidPair<T> {
    pub fn new(rho: DensityOperator<T>, sigma: DensityOperator<T>) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::mismatch(format!(
                "rho is {}-dim, sigma is {}-dim",
                rho.dim(),
                sigma.dim()
            )));
        }
        let (r, s) = (rho.entries(), sigma.entries());
        let comm = HermitianOperator::hermitize((r * s - s * r) * cplx(T::zero(), T::one()));
        let commuting = comm.operator_norm() <= T::tol(COMMUTING_TOL);
        let joint = commuting.then(|| joint_diagonal(&rho, &sigma));
        Ok(Self {
            rho,
            sigma,
            commuting,
            joint,
        })
    }

    pub fn rho(&self) -> &DensityOperator<T> {
        &self.rho
    }

    pub fn sigma(&self) -> &DensityOperator<T> {
        &self.sigma
    }

    pub fn commuting(&self) -> bool {
        self.commuting
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Eigenvalues `(pᵢ, qᵢ)` in a common eigenbasis, for commuting pairs.
    pub fn joint_spectrum(&self) -> Option<(&[T], &[T])> {
        self.joint.as_ref().map(|(p, q)| (p.as_slice(), q.as_slice()))
    }

    pub(crate) fn require_joint(&self) -> Result<(&[T], &[T])> {
        self.joint_spectrum()
            .ok_or_else(|| Error::invalid("the classical fast path needs a commuting pair"))
    }
}

/// Diagonalizes `σ`, then `ρ` inside each eigenspace of `σ`.
fn joint_diagonal<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> (Vec<T>, Vec<T>) {
    let spec = sigma.eig();
    let n = sigma.dim();
    let (mut p, mut q) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && spec.eigenvalues[end - 1] - spec.eigenvalues[end] <= T::tol(CLUSTER_TOL) {
            end += 1;
        }
        let block: CMatrix<T> = spec.eigenvectors.columns(start, end - start).into_owned();
        let compressed = HermitianOperator::hermitize(block.adjoint() * rho.entries() * &block);
        for mu in compressed.eigenvalues() {
            p.push(mu.max(T::zero()));
        }
        let mean = spec.eigenvalues[start..end].iter().fold(T::zero(), |a, &x| a + x) / T::lit((end - start) as f64);
        q.extend(std::iter::repeat_n(mean.max(T::zero()), end - start));
        start = end;
    }
    (p, q)
}

pub(crate) fn guard_dense(dim: usize, n: usize) -> Result<usize> {
    let full = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(dim).filter(|&d| d <= DENSE_MAX_DIM));
    full.ok_or_else(|| {
        Error::SizeGuard(format!(
            "{dim}^{n} exceeds the dense limit {DENSE_MAX_DIM}; use the commuting fast path"
        ))
    })
}

/// `ρ^⊗n`, limited to total dimension 4096.
pub fn tensor_power<T: Real>(rho: &DensityOperator<T>, n: usize) -> Result<DensityOperator<T>> {
    if n == 0 {
        return Err(Error::invalid("tensor power needs n ≥ 1"));
    }
    guard_dense(rho.dim(), n)?;
    let mut acc = rho.op().clone();
    for _ in 1..n {
        acc = tensor(&acc, rho);
    }
    Ok(DensityOperator::new_trusted(acc))
}
