//! Seeded random ensembles used by the property suites.
//!
//! Densities are drawn from the Hilbert–Schmidt (Ginibre) measure, unitaries
//! from Haar via Gram–Schmidt of a Gaussian matrix, channels from random
//! Stinespring isometries. Everything is a deterministic function of the
//! generator state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::channel::{QuantumChannel, QuantumInstrument};
use crate::operator::density::DensityOperator;
use crate::operator::hermitian::{CMatrix, CVector, HermitianOperator};
use crate::scalar::{cplx, creal, Real, C};

pub type SeededRng = ChaCha8Rng;

/// Generator for `(seed, stream)`; distinct streams never overlap.
pub fn seeded(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    cplx(T::lit(re * s), T::lit(im * s))
}

pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    // column-major fill keeps the stream layout independent of nalgebra internals
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Orthonormalizes the columns in place (two-pass modified Gram–Schmidt).
fn gram_schmidt<T: Real>(m: &mut CMatrix<T>) -> Result<()> {
    let cols = m.ncols();
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let qk = m.column(k).into_owned();
                let proj = qk.dotc(&m.column(j));
                let update = &qk * proj;
                let mut cj = m.column_mut(j);
                cj -= update;
            }
        }
        let norm = m.column(j).norm();
        if norm <= T::lit(1e-300) {
            return Err(Error::invalid("degenerate Gaussian draw"));
        }
        let inv = creal(T::one() / norm);
        m.column_mut(j).iter_mut().for_each(|c| *c *= inv);
    }
    Ok(())
}

/// `(G + G†)/2` with a standard complex Gaussian `G`.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator<T> {
    HermitianOperator::hermitize(gaussian_matrix(dim, dim, rng))
}

/// `GG†/Tr(GG†)` with `G` a `dim × rank` Gaussian draw.
pub fn random_density_with<T: Real, R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator<T>> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::invalid(format!("rank {rank} invalid for dim {dim}")));
    }
    let g = gaussian_matrix::<T, _>(dim, rank, rng);
    DensityOperator::normalize_from(HermitianOperator::hermitize(&g * g.adjoint()))
}

pub fn random_density<T: Real>(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator<T>> {
    random_density_with(dim, rank, &mut seeded(seed, 0))
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn random_isometry_with<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<CMatrix<T>> {
    if cols == 0 || rows < cols {
        return Err(Error::invalid(format!("no {rows}x{cols} isometry")));
    }
    let mut m = gaussian_matrix(rows, cols, rng);
    gram_schmidt(&mut m)?;
    Ok(m)
}

/// Haar unitary; Gram–Schmidt leaves `R` with a positive diagonal, which
/// fixes the phase freedom of the QR factorization.
pub fn random_unitary_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    random_isometry_with(dim, dim, rng).expect("square Gaussian matrix has full rank a.s.")
}

pub fn random_unitary<T: Real>(dim: usize, seed: u64) -> CMatrix<T> {
    random_unitary_with(dim, &mut seeded(seed, 0))
}

/// Channel from a random isometry `H_in → H_out ⊗ H_env`, then `Tr_env`.
pub fn random_channel_with<T: Real, R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    env_dim: usize,
    rng: &mut R,
) -> Result<QuantumChannel<T>> {
    if env_dim == 0 || out_dim == 0 || in_dim == 0 {
        return Err(Error::invalid("channel dimensions must be positive"));
    }
    if out_dim * env_dim < in_dim {
        return Err(Error::invalid(format!(
            "out_dim * env_dim = {} < in_dim = {in_dim}",
            out_dim * env_dim
        )));
    }
    let v = random_isometry_with::<T, _>(out_dim * env_dim, in_dim, rng)?;
    let kraus = (0..env_dim)
        .map(|e| CMatrix::from_fn(out_dim, in_dim, |o, i| v[(o * env_dim + e, i)]))
        .collect();
    QuantumChannel::new(kraus)
}

pub fn random_channel<T: Real>(in_dim: usize, out_dim: usize, env_dim: usize, seed: u64) -> Result<QuantumChannel<T>> {
    random_channel_with(in_dim, out_dim, env_dim, &mut seeded(seed, 0))
}

/// Instrument with `outcomes` square elements cut from one random isometry.
pub fn random_instrument_with<T: Real, R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    rng: &mut R,
) -> Result<QuantumInstrument<T>> {
    if outcomes == 0 {
        return Err(Error::invalid("instrument needs at least one outcome"));
    }
    let v = random_isometry_with::<T, _>(dim * outcomes, dim, rng)?;
    let elements = (0..outcomes).map(|k| v.rows(k * dim, dim).into_owned()).collect();
    QuantumInstrument::new(elements)
}

pub fn random_pure_vector_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector<T> {
    let g: CMatrix<T> = gaussian_matrix(dim, 1, rng);
    let v = g.column(0).into_owned();
    let n = v.norm();
    v.map(|c| c / creal(n))
}

pub fn random_pure_bipartite_with<T: Real, R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> Result<DensityOperator<T>> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::invalid("factor dimensions must be positive"));
    }
    DensityOperator::pure(&random_pure_vector_with(dim_a * dim_b, rng))
}

pub fn random_pure_bipartite<T: Real>(dim_a: usize, dim_b: usize, seed: u64) -> Result<DensityOperator<T>> {
    random_pure_bipartite_with(dim_a, dim_b, &mut seeded(seed, 0))
}

/// Operator `0 ≤ P ≤ I` with Haar eigenbasis and uniform eigenvalues.
pub fn random_contraction_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator<T> {
    let u = random_unitary_with::<T, _>(dim, rng);
    let diag: Vec<T> = (0..dim).map(|_| T::lit(rng.random::<f64>())).collect();
    HermitianOperator::from_real_diagonal(&diag).conjugate(&u)
}

/// Unnormalized positive operator `GG†` of full rank (a.s.).
pub fn random_positive_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator<T> {
    let g = gaussian_matrix::<T, _>(dim, dim, rng);
    HermitianOperator::hermitize(&g * g.adjoint())
}

/// Random probability vector (normalized exponential draws).
pub fn random_simplex_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}
