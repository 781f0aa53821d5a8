use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{cabs, creal, Real, C};

pub type CMatrix<T> = DMatrix<C<T>>;
pub type CVector<T> = DVector<C<T>>;

/// Max-abs entrywise deviation from self-adjointness accepted on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative eigenvalue cutoff that defines the support of a positive operator.
pub const SUPPORT_REL_TOL: f64 = 1e-10;
/// Absolute cutoff below which an eigenvalue counts as zero in spectral projections.
pub const ZERO_EIGEN_TOL: f64 = 1e-12;

/// Dense self-adjoint matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    entries: CMatrix<T>,
}

/// Eigendecomposition with eigenvalues in descending order.
///
/// Each eigenvector has its first non-negligible component made real and
/// positive so that repeated decompositions of the same input agree.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: CMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(entries: CMatrix<T>) -> Result<Self> {
        Self::with_tolerance(entries, T::tol(HERMITIAN_TOL))
    }

    /// Validates self-adjointness within `tol` and symmetrizes the residue away.
    pub fn with_tolerance(entries: CMatrix<T>, tol: T) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let (row, col, deviation) = worst_asymmetry(&entries);
        if deviation > tol {
            return Err(Error::NotHermitian {
                row,
                col,
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self::hermitize(entries))
    }

    /// Symmetrizes `(M + M†) / 2`; callers guarantee `M` is Hermitian up to rounding.
    pub(crate) fn hermitize(entries: CMatrix<T>) -> Self {
        let adj = entries.adjoint();
        let half = creal(T::lit(0.5));
        Self {
            entries: (entries + adj) * half,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = creal(d);
        }
        Self { entries: m }
    }

    /// Rank-one operator `|v⟩⟨v|`.
    pub fn ket_bra(v: &CVector<T>) -> Self {
        Self::hermitize(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix<T> {
        self.entries
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.entries[(i, i)].re)
    }

    /// `Tr(A B)` for Hermitian `A`, `B` (always real).
    pub fn inner(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .fold(T::zero(), |acc, (a, b)| acc + (a * b.conj()).re)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            entries: &self.entries * creal(s),
        }
    }

    /// `M A M†` for an arbitrary (possibly rectangular) `M`.
    pub fn conjugate(&self, m: &CMatrix<T>) -> Self {
        Self::hermitize(m * &self.entries * m.adjoint())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.kronecker(&other.entries),
        }
    }

    /// Frobenius-norm distance, used for convergence diagnostics.
    pub fn frobenius_distance(&self, other: &Self) -> T {
        (&self.entries - &other.entries).norm()
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.norm()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max(cabs(a - b)))
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        let zero = C::new(T::zero(), T::zero());
        (0..n).all(|j| (0..n).all(|i| i == j || self.entries[(i, j)] == zero))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn eig(&self) -> Spectrum<T> {
        let n = self.dim();
        if self.is_diagonal() {
            let diag = self.diagonal();
            let order = descending_order(&diag);
            let mut vecs = CMatrix::zeros(n, n);
            for (col, &i) in order.iter().enumerate() {
                vecs[(i, col)] = creal(T::one());
            }
            return Spectrum {
                eigenvalues: order.iter().map(|&i| diag[i]).collect(),
                eigenvectors: vecs,
            };
        }
        let se = SymmetricEigen::new(self.entries.clone());
        let raw: Vec<T> = se.eigenvalues.iter().copied().collect();
        let order = descending_order(&raw);
        let mut vecs = CMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            let mut v = se.eigenvectors.column(i).into_owned();
            fix_phase(&mut v);
            vecs.set_column(col, &v);
        }
        Spectrum {
            eigenvalues: order.iter().map(|&i| raw[i]).collect(),
            eigenvectors: vecs,
        }
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        if self.is_diagonal() {
            let mut d = self.diagonal();
            d.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
            return d;
        }
        let mut ev: Vec<T> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        ev
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn min_eigenvalue(&self) -> T {
        *self.eigenvalues().last().expect("dim >= 1")
    }

    /// Applies `f` to every eigenvalue.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Self {
        self.eig().map(f)
    }

    /// Positive part `Σ_{λ>0} λ P_λ`.
    pub fn positive_part(&self) -> Self {
        self.map_spectrum(|l| l.max(T::zero()))
    }

    /// Negative part `Σ_{λ<0} |λ| P_λ`, so that `A = A₊ − A₋`.
    pub fn negative_part(&self) -> Self {
        self.map_spectrum(|l| (-l).max(T::zero()))
    }

    /// Schatten-1 norm `Σ|λ|`.
    pub fn trace_norm(&self) -> T {
        self.eigenvalues().into_iter().fold(T::zero(), |acc, l| acc + l.abs())
    }

    /// Operator norm `max |λ|`.
    pub fn operator_norm(&self) -> T {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[ev.len() - 1].abs())
    }

    pub fn is_psd(&self, tol: T) -> bool {
        self.min_eigenvalue() >= -tol
    }
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> T {
        self.eigenvalues[self.dim() - 1]
    }

    pub fn vector(&self, i: usize) -> CVector<T> {
        self.eigenvectors.column(i).into_owned()
    }

    /// `Σ f(λᵢ) vᵢ vᵢ†`.
    pub fn map(&self, f: impl Fn(T) -> T) -> HermitianOperator<T> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = creal(f(l));
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fl;
            }
        }
        HermitianOperator::hermitize(scaled * self.eigenvectors.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianOperator<T> {
        self.map(|l| l)
    }

    /// `Σ_{i : keep(λᵢ)} vᵢ vᵢ†` together with the number of kept eigenvectors.
    pub fn projector_where(&self, keep: impl Fn(T) -> bool) -> (HermitianOperator<T>, usize) {
        let n = self.dim();
        let kept: Vec<usize> = (0..n).filter(|&i| keep(self.eigenvalues[i])).collect();
        let mut sel = CMatrix::zeros(n, kept.len());
        for (c, &i) in kept.iter().enumerate() {
            sel.set_column(c, &self.eigenvectors.column(i));
        }
        (HermitianOperator::hermitize(&sel * sel.adjoint()), kept.len())
    }

    /// Eigenvalue threshold above which an eigenvector belongs to the support.
    pub fn support_cutoff(&self) -> T {
        T::tol(SUPPORT_REL_TOL) * self.max().max(T::zero())
    }

    /// Number of eigenvalues strictly above the support cutoff.
    pub fn support_rank(&self) -> usize {
        let cut = self.support_cutoff();
        self.eigenvalues.iter().filter(|&&l| l > cut && l > T::zero()).count()
    }

    /// `f` applied on the support, zero on the kernel.
    pub fn map_on_support(&self, f: impl Fn(T) -> T) -> HermitianOperator<T> {
        let cut = self.support_cutoff();
        self.map(|l| if l > cut && l > T::zero() { f(l) } else { T::zero() })
    }
}

fn descending_order<T: Real>(vals: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap_or(Ordering::Equal));
    order
}

fn fix_phase<T: Real>(v: &mut CVector<T>) {
    let scale = v.iter().fold(T::zero(), |acc, c| acc.max(cabs(*c)));
    let cut = scale * T::lit(1e-8);
    if let Some(first) = v.iter().find(|c| cabs(**c) > cut).copied() {
        let phase = first.conj() / creal(cabs(first));
        for c in v.iter_mut() {
            *c *= phase;
        }
    }
}

fn worst_asymmetry<T: Real>(m: &CMatrix<T>) -> (usize, usize, T) {
    let n = m.nrows();
    let mut worst = (0, 0, T::zero());
    for i in 0..n {
        for j in i..n {
            let d = cabs(m[(i, j)] - m[(j, i)].conj());
            if d > worst.2 {
                worst = (i, j, d);
            }
        }
    }
    worst
}

impl<T: Real> Add for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn add(self, rhs: Self) -> HermitianOperator<T> {
        HermitianOperator {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl<T: Real> Sub for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn sub(self, rhs: Self) -> HermitianOperator<T> {
        HermitianOperator {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl<T: Real> Add for HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn add(self, rhs: Self) -> HermitianOperator<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn sub(self, rhs: Self) -> HermitianOperator<T> {
        &self - &rhs
    }
}

impl<T: Real> Mul<T> for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn mul(self, rhs: T) -> HermitianOperator<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Mul<T> for HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn mul(self, rhs: T) -> HermitianOperator<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Neg for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn neg(self) -> HermitianOperator<T> {
        self.scale(-T::one())
    }
}
