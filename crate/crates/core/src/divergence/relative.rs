use crate::divergence::value::DivergenceValue;
use crate::error::{Error, Result};
use crate::operator::density::DENSITY_EIGEN_TOL;
use crate::operator::{compare_projector, support_projector, CMatrix, HermitianOperator, Relation, Spectrum};
use crate::scalar::{cabs, xlog2x, Real};

/// `supp ρ ⊆ supp σ` iff `‖(I−π_σ)ρ(I−π_σ)‖_∞` is at most this.
pub const SUPPORT_INCLUSION_TOL: f64 = 1e-9;
/// Bound on `Tr[{ρ ≥ λσ}(ρ − λσ)]` at the returned `λ` of [`d_max`].
pub const DMAX_RESIDUAL_TOL: f64 = 1e-8;
/// Overlaps `Tr(π_ρ σ)` below this fraction of `Tr σ` count as zero.
pub const OVERLAP_TOL: f64 = 1e-14;

fn check_dims<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::mismatch(format!(
            "rho is {}-dim but sigma is {}-dim",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

fn check_positive<T: Real>(spec: &Spectrum<T>) -> Result<()> {
    let min = spec.min();
    if min < -T::tol(DENSITY_EIGEN_TOL) * T::one().max(spec.max()) {
        return Err(Error::NegativeEigenvalue { value: min.as_f64() });
    }
    Ok(())
}

/// Spectral data of the second argument, shared by every divergence.
pub(crate) struct SigmaFrame<T: Real> {
    pub spec: Spectrum<T>,
    /// Columns spanning `supp σ`.
    pub support: CMatrix<T>,
    /// Columns spanning `ker σ`.
    pub kernel: CMatrix<T>,
}

impl<T: Real> SigmaFrame<T> {
    pub fn new(sigma: &HermitianOperator<T>) -> Result<Self> {
        let spec = sigma.eig();
        check_positive(&spec)?;
        let cut = spec.support_cutoff();
        let n = spec.dim();
        let rank = spec.eigenvalues.iter().filter(|&&l| l > cut && l > T::zero()).count();
        let support = spec.eigenvectors.columns(0, rank).into_owned();
        let kernel = spec.eigenvectors.columns(rank, n - rank).into_owned();
        Ok(Self { spec, support, kernel })
    }

    pub fn rank(&self) -> usize {
        self.support.ncols()
    }

    /// `‖(I−π_σ)ρ(I−π_σ)‖_∞ ≤ tol`.
    pub fn contains(&self, rho: &HermitianOperator<T>) -> bool {
        if self.kernel.ncols() == 0 {
            return true;
        }
        let k = rho.conjugate(&self.kernel.adjoint());
        k.operator_norm() <= T::tol(SUPPORT_INCLUSION_TOL)
    }

    /// `σ^{-1/2} ρ σ^{-1/2}` compressed to `supp σ`.
    pub fn whiten(&self, rho: &HermitianOperator<T>) -> HermitianOperator<T> {
        let r = self.rank();
        let mut w = self.support.adjoint();
        for i in 0..r {
            let s = T::one() / self.spec.eigenvalues[i].sqrt();
            for j in 0..w.ncols() {
                w[(i, j)] = w[(i, j)].scale(s);
            }
        }
        rho.conjugate(&w)
    }
}

/// `supp ρ ⊆ supp σ` under the inclusion tolerance.
pub fn support_contained<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<bool> {
    check_dims(rho, sigma)?;
    Ok(SigmaFrame::new(sigma)?.contains(rho))
}

fn nonzero_max<T: Real>(mu: T) -> Result<T> {
    if mu <= T::zero() {
        return Err(Error::invalid("first argument must be a non-zero positive operator"));
    }
    Ok(mu)
}

/// `log₂ μ_max(σ^{-1/2} ρ σ^{-1/2})` without the residual self-check.
pub(crate) fn d_max_unchecked<T: Real>(
    rho: &HermitianOperator<T>,
    frame: &SigmaFrame<T>,
) -> Result<DivergenceValue<T>> {
    if !frame.contains(rho) {
        return Ok(DivergenceValue::Infinite);
    }
    if frame.rank() == 0 {
        return Ok(DivergenceValue::Infinite);
    }
    let mu = nonzero_max(frame.whiten(rho).max_eigenvalue())?;
    Ok(DivergenceValue::Finite(mu.log2()))
}

/// `D_max(ρ‖σ) = log₂ min{λ : ρ ≤ λσ}`.
///
/// The returned value satisfies `Tr[{ρ ≥ λσ}(ρ − λσ)] ≤ 1e-8 · max(1, λ‖σ‖)`
/// at `λ = 2^bits`; a violation is reported as a certificate error.
pub fn d_max<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<DivergenceValue<T>> {
    check_dims(rho, sigma)?;
    let frame = SigmaFrame::new(sigma)?;
    let value = d_max_unchecked(rho, &frame)?;
    if let DivergenceValue::Finite(bits) = value {
        let lambda = T::lit(2.0).powf(bits);
        let residual = d_max_residual(rho, sigma, lambda)?;
        let allowed = T::tol(DMAX_RESIDUAL_TOL) * T::one().max(lambda * frame.spec.max());
        if residual > allowed {
            return Err(Error::Certificate(format!(
                "d_max residual {} exceeds {} at lambda {}",
                residual.as_f64(),
                allowed.as_f64(),
                lambda.as_f64()
            )));
        }
    }
    Ok(value)
}

/// `Tr[{ρ ≥ λσ}(ρ − λσ)]`, which vanishes exactly when `ρ ≤ λσ`.
pub fn d_max_residual<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>, lambda: T) -> Result<T> {
    let scaled = sigma.scale(lambda);
    let p = compare_projector(rho, &scaled, Relation::Geq)?;
    Ok(p.inner(&(rho - &scaled)))
}

/// The three definitional forms of `D_max`, in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DmaxForms<T> {
    /// `log₂ μ_max(σ^{-1/2} ρ σ^{-1/2})`.
    pub eigen: T,
    /// `log₂ min{λ : λσ − ρ ≥ 0}` by bisection.
    pub dominance: T,
    /// `log₂ min{λ : Tr[{ρ ≥ λσ}(ρ − λσ)] = 0}` by bisection.
    pub projector: T,
}

impl<T: Real> DmaxForms<T> {
    pub fn spread(&self) -> T {
        let hi = self.eigen.max(self.dominance).max(self.projector);
        let lo = self.eigen.min(self.dominance).min(self.projector);
        hi - lo
    }
}

/// Smallest `λ > 0` with `feasible(λ)`, for a predicate monotone in `λ`.
fn bisect_threshold<T: Real>(mut feasible: impl FnMut(T) -> bool) -> Result<T> {
    let two = T::lit(2.0);
    let mut hi = T::one();
    let mut guard = 0;
    while !feasible(hi) {
        hi *= two;
        guard += 1;
        if guard > 2000 {
            return Err(Error::NonConvergence {
                iterations: guard,
                residual: f64::INFINITY,
            });
        }
    }
    let mut lo = hi / two;
    guard = 0;
    while feasible(lo) {
        hi = lo;
        lo /= two;
        guard += 1;
        if guard > 2000 {
            return Ok(T::zero());
        }
    }
    for _ in 0..200 {
        if hi - lo <= T::default_epsilon() * hi {
            break;
        }
        let mid = (lo + hi) / two;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Evaluates all three forms; the bisection forms work inside `supp σ`.
/// Errors when the support condition fails, since then all three are `+∞`.
pub fn d_max_forms<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<DmaxForms<T>> {
    check_dims(rho, sigma)?;
    let frame = SigmaFrame::new(sigma)?;
    let eigen = match d_max_unchecked(rho, &frame)? {
        DivergenceValue::Finite(x) => x,
        DivergenceValue::Infinite => return Err(Error::SupportViolation),
    };
    let v = frame.support.adjoint();
    let r = rho.conjugate(&v);
    let s = sigma.conjugate(&v);
    let scale = |lambda: T| T::lit(1e-14) * T::one().max(lambda * s.operator_norm() + r.operator_norm());

    let dominance = bisect_threshold(|lambda: T| (&s.scale(lambda) - &r).min_eigenvalue() >= -scale(lambda))?;
    let projector = bisect_threshold(|lambda: T| {
        let scaled = s.scale(lambda);
        let p = compare_projector(&r, &scaled, Relation::Geq).expect("same dimension");
        p.inner(&(&r - &scaled)) <= scale(lambda)
    })?;
    Ok(DmaxForms {
        eigen,
        dominance: dominance.log2(),
        projector: projector.log2(),
    })
}

/// `D_min(ρ‖σ) = −log₂ Tr(π_ρ σ)`.
pub fn d_min<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<DivergenceValue<T>> {
    check_dims(rho, sigma)?;
    check_positive(&sigma.eig())?;
    let p = support_projector(rho);
    if p.rank() == 0 {
        return Err(Error::invalid("first argument must be a non-zero positive operator"));
    }
    Ok(overlap_bits(p.inner(sigma), sigma.trace()))
}

pub(crate) fn overlap_bits<T: Real>(overlap: T, sigma_trace: T) -> DivergenceValue<T> {
    if overlap <= T::tol(OVERLAP_TOL) * sigma_trace.max(T::default_epsilon()) {
        DivergenceValue::Infinite
    } else {
        DivergenceValue::Finite(-overlap.log2())
    }
}

/// `S(ρ‖σ) = Tr ρ log₂ ρ − Tr ρ log₂ σ`, `+∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy<T: Real>(
    rho: &HermitianOperator<T>,
    sigma: &HermitianOperator<T>,
) -> Result<DivergenceValue<T>> {
    check_dims(rho, sigma)?;
    let frame = SigmaFrame::new(sigma)?;
    if !frame.contains(rho) {
        return Ok(DivergenceValue::Infinite);
    }
    let neg_entropy = rho.eigenvalues().into_iter().fold(T::zero(), |acc, l| acc + xlog2x(l));
    let mut cross = T::zero();
    for j in 0..frame.rank() {
        let v = frame.spec.vector(j);
        let weight = (v.adjoint() * rho.entries() * &v)[(0, 0)].re;
        cross += weight * frame.spec.eigenvalues[j].log2();
    }
    Ok(DivergenceValue::Finite(neg_entropy - cross))
}

/// Support spectra of a pair with squared overlaps `|⟨uᵢ|vⱼ⟩|²`, so that
/// `Tr ρ^s σ^{1−s} = Σ aᵢ^s bⱼ^{1−s} wᵢⱼ` with `ρ⁰ = π_ρ`, `σ⁰ = π_σ`.
pub(crate) struct PairSpectra<T: Real> {
    a: Vec<T>,
    b: Vec<T>,
    w: Vec<T>,
}

impl<T: Real> PairSpectra<T> {
    pub fn new(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<Self> {
        check_dims(rho, sigma)?;
        let sr = rho.eig();
        let ss = sigma.eig();
        check_positive(&sr)?;
        check_positive(&ss)?;
        let keep = |s: &Spectrum<T>| -> Vec<usize> {
            let cut = s.support_cutoff();
            (0..s.dim())
                .filter(|&i| s.eigenvalues[i] > cut && s.eigenvalues[i] > T::zero())
                .collect()
        };
        let ia = keep(&sr);
        let ib = keep(&ss);
        let overlap = sr.eigenvectors.adjoint() * &ss.eigenvectors;
        let mut w = Vec::with_capacity(ia.len() * ib.len());
        for &i in &ia {
            for &j in &ib {
                let c = cabs(overlap[(i, j)]);
                w.push(c * c);
            }
        }
        Ok(Self {
            a: ia.iter().map(|&i| sr.eigenvalues[i]).collect(),
            b: ib.iter().map(|&j| ss.eigenvalues[j]).collect(),
            w,
        })
    }

    /// `Tr ρ^s σ^{1−s}` for `s ∈ [0, 1]`.
    pub fn q(&self, s: T) -> T {
        let nb = self.b.len();
        let mut total = T::zero();
        for (i, &a) in self.a.iter().enumerate() {
            let pa = a.powf(s);
            for (j, &b) in self.b.iter().enumerate() {
                total += pa * b.powf(T::one() - s) * self.w[i * nb + j];
            }
        }
        total
    }
}

/// Relative Rényi entropy `S_α(ρ‖σ) = log₂ Tr(ρ^α σ^{1−α}) / (α − 1)` for `α ∈ (0, 1)`.
pub fn renyi_relative<T: Real>(
    rho: &HermitianOperator<T>,
    sigma: &HermitianOperator<T>,
    alpha: T,
) -> Result<DivergenceValue<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::invalid(format!(
            "Renyi order must lie in (0, 1), got {}",
            alpha.as_f64()
        )));
    }
    let pair = PairSpectra::new(rho, sigma)?;
    let q = pair.q(alpha);
    if q <= T::tol(OVERLAP_TOL) {
        return Ok(DivergenceValue::Infinite);
    }
    Ok(DivergenceValue::Finite(q.log2() / (alpha - T::one())))
}

/// Minimizer and value of the Chernoff exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chernoff<T> {
    pub value: DivergenceValue<T>,
    pub s: T,
    pub q_min: T,
}

pub const CHERNOFF_GRID: usize = 64;
pub const CHERNOFF_S_TOL: f64 = 1e-10;

/// `ξ(ρ, σ) = −log₂ min_{0≤s≤1} Tr ρ^s σ^{1−s}` with the minimizer.
pub fn chernoff<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<Chernoff<T>> {
    let pair = PairSpectra::new(rho, sigma)?;
    let grid = CHERNOFF_GRID - 1;
    let at = |k: usize| T::lit(k as f64 / grid as f64);
    let (mut best_s, mut best_q) = (T::zero(), pair.q(T::zero()));
    let mut best_k = 0;
    for k in 1..=grid {
        let q = pair.q(at(k));
        if q < best_q {
            best_q = q;
            best_s = at(k);
            best_k = k;
        }
    }
    let mut lo = at(best_k.saturating_sub(1));
    let mut hi = at((best_k + 1).min(grid));
    let g = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (pair.q(x1), pair.q(x2));
    while hi - lo > T::tol(CHERNOFF_S_TOL) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = pair.q(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = pair.q(x2);
        }
    }
    for (s, q) in [(x1, f1), (x2, f2)] {
        if q < best_q {
            best_q = q;
            best_s = s;
        }
    }
    let value = if best_q <= T::tol(OVERLAP_TOL) {
        DivergenceValue::Infinite
    } else {
        DivergenceValue::Finite(-best_q.log2())
    };
    Ok(Chernoff {
        value,
        s: best_s,
        q_min: best_q,
    })
}

pub fn chernoff_bound<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<DivergenceValue<T>> {
    Ok(chernoff(rho, sigma)?.value)
}
