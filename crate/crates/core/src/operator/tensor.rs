use crate::error::{Error, Result};
use crate::operator::density::DensityOperator;
use crate::operator::hermitian::{CMatrix, HermitianOperator};
use crate::scalar::Real;

/// Tensor factor of a bipartite space `H_A ⊗ H_B` (basis index `i·d_B + j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

fn check_dims(total: usize, (da, db): (usize, usize)) -> Result<()> {
    if da == 0 || db == 0 || da * db != total {
        return Err(Error::mismatch(format!(
            "dims ({da}, {db}) do not factor a {total}-dim operator"
        )));
    }
    Ok(())
}

pub fn tensor<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> HermitianOperator<T> {
    a.kron(b)
}

/// Partial trace keeping the factor `keep`.
pub fn partial_trace<T: Real>(
    x: &HermitianOperator<T>,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<HermitianOperator<T>> {
    check_dims(x.dim(), dims)?;
    let (da, db) = dims;
    let m = x.entries();
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, k| (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()),
        Subsystem::B => CMatrix::from_fn(db, db, |j, l| (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()),
    };
    Ok(HermitianOperator::hermitize(out))
}

pub fn partial_trace_state<T: Real>(
    rho: &DensityOperator<T>,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<DensityOperator<T>> {
    DensityOperator::new(partial_trace(rho, dims, keep)?)
}

/// Transpose on one tensor factor.
pub fn partial_transpose<T: Real>(
    x: &HermitianOperator<T>,
    dims: (usize, usize),
    which: Subsystem,
) -> Result<HermitianOperator<T>> {
    check_dims(x.dim(), dims)?;
    let (_, db) = dims;
    let m = x.entries();
    let n = x.dim();
    let out = CMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        match which {
            Subsystem::B => m[(i * db + l, k * db + j)],
            Subsystem::A => m[(k * db + j, i * db + l)],
        }
    });
    Ok(HermitianOperator::hermitize(out))
}
