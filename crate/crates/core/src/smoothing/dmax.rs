use crate::divergence::relative::{d_max_unchecked, SigmaFrame};
use crate::divergence::DivergenceValue;
use crate::error::{Error, Result};
use crate::operator::{
    compare_projector, generalized_inverse_sqrt, sqrt_psd, DensityOperator, HermitianOperator, Relation,
};
use crate::scalar::Real;
use crate::smoothing::certificate::{lemma5_smooth, SmoothingCertificate};

pub const UPPER_BRACKET_BITS: f64 = 60.0;
pub const UPPER_RESOLUTION_BITS: f64 = 1e-6;
pub const EXACT_MAX_DIM: usize = 16;
pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const PDHG_MAX_ITERS: usize = 2_000;
const PDHG_CHECK_EVERY: usize = 10;
pub const EXACT_RESOLUTION_BITS: f64 = 1e-5;

/// Bisection result for the gentle-projection upper bound on the smoothed `D_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct DmaxUpperBound<T: Real> {
    pub lambda_bits: T,
    pub certificate: SmoothingCertificate<T>,
    /// The bracket floor `D_max − 60` was already admissible.
    pub floor_hit: bool,
}

fn finite_d_max<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::mismatch("rho and sigma differ in dimension"));
    }
    match d_max_unchecked(rho, &SigmaFrame::new(sigma)?)? {
        DivergenceValue::Finite(x) => Ok(x),
        DivergenceValue::Infinite => Err(Error::SupportViolation),
    }
}

/// `√(8 Tr[{ρ > 2^λ σ} ρ])`.
pub fn gentle_epsilon<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>, lambda_bits: T) -> Result<T> {
    let p = compare_projector(rho, &sigma.scale(T::lit(2.0).powf(lambda_bits)), Relation::Gt)?;
    Ok((T::lit(8.0) * p.inner(rho).max(T::zero())).sqrt())
}

/// Smallest `λ` on a `1e-6`-bit bisection over `[D_max − 60, D_max]` with
/// `√(8 Tr[{ρ > 2^λσ}ρ]) ≤ ε`, with the smoothing certificate at that `λ`.
pub fn smooth_dmax_upper<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &HermitianOperator<T>,
    eps: T,
) -> Result<DmaxUpperBound<T>> {
    if !eps.is_finite() || eps <= T::zero() {
        return Err(Error::invalid("smoothing parameter must be positive and finite"));
    }
    let top = finite_d_max(rho, sigma)?;
    let ok = |l: T| gentle_epsilon(rho, sigma, l).map(|e| e <= eps);
    let mut lo = top - T::lit(UPPER_BRACKET_BITS);
    let mut hi = top;
    let floor_hit = ok(lo)?;
    if floor_hit {
        hi = lo;
    } else {
        while hi - lo > T::tol(UPPER_RESOLUTION_BITS) {
            let mid = (lo + hi) / T::lit(2.0);
            if ok(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    Ok(DmaxUpperBound {
        lambda_bits: hi,
        certificate: lemma5_smooth(rho, sigma, hi)?,
        floor_hit,
    })
}

/// Outcome of the question "is there `ρ̄ ∈ B^ε(ρ)` with `0 ≤ ρ̄ ≤ tσ`?".
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility<T: Real> {
    /// A point of the ball dominated by `tσ`.
    Feasible(HermitianOperator<T>),
    /// A dual point shows every `0 ≤ X ≤ tσ` with `Tr X ≤ Tr ρ` is farther than `ε` from `ρ`.
    Infeasible,
}

/// Spectrum clipped to `[lo, hi]`.
fn clip<T: Real>(a: &HermitianOperator<T>, lo: T, hi: T) -> HermitianOperator<T> {
    a.map_spectrum(|x| x.max(lo).min(hi))
}

/// Decides feasibility at `t`.
///
/// Tries the candidate `X₀ = ρ − (ρ − tσ)₊` first (exact for commuting pairs),
/// then runs a primal-dual iteration on `min ‖ρ − X‖₁` over `X = σ^{1/2} Y σ^{1/2}`,
/// `0 ≤ Y ≤ t`, `Tr X ≤ Tr ρ`, whose dual is
/// `max_{−I ≤ W ≤ I, μ ≥ 0} Tr Wρ − μ Tr ρ − t Tr(σ^{1/2} W σ^{1/2} − μσ)₊`.
/// Stops as soon as a primal point lies in the ball or a dual value exceeds `ε`.
pub fn dmax_feasibility<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &HermitianOperator<T>,
    eps: T,
    t: T,
) -> Result<Feasibility<T>> {
    feasibility(rho, sigma, eps, t, &mut None)
}

/// Primal and dual iterates carried between neighbouring values of `t`.
#[derive(Clone)]
struct Iterates<T: Real> {
    x: HermitianOperator<T>,
    w: HermitianOperator<T>,
    a: HermitianOperator<T>,
    mu: T,
}

fn feasibility<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &HermitianOperator<T>,
    eps: T,
    t: T,
    warm: &mut Option<Iterates<T>>,
) -> Result<Feasibility<T>> {
    let t_sigma = sigma.scale(t);
    let excess = (rho.op() - &t_sigma).positive_part();
    if excess.trace() > eps {
        return Ok(Feasibility::Infeasible);
    }
    let x0 = rho.op() - &excess;
    if x0.min_eigenvalue() >= -T::tol(FEASIBILITY_TOL) {
        return Ok(Feasibility::Feasible(x0));
    }
    let root = sqrt_psd(sigma)?;
    let s = root.entries();
    let inv_root = generalized_inverse_sqrt(sigma)?;
    let n = rho.dim();
    let cap = rho.trace();
    let eye = HermitianOperator::identity(n);
    let step = T::lit(0.95) / T::lit(2.0 + n as f64).sqrt();
    let Iterates {
        mut x,
        mut w,
        mut a,
        mut mu,
    } = warm.take().unwrap_or_else(|| Iterates {
        x: x0.positive_part(),
        w: HermitianOperator::zeros(n),
        a: HermitianOperator::zeros(n),
        mu: T::zero(),
    });
    let mut x_bar = x.clone();
    let mut gap = T::lit(f64::INFINITY);
    for iter in 1..=PDHG_MAX_ITERS {
        w = clip(&(&w + &(rho.op() - &x_bar).scale(step)), -T::one(), T::one());
        a = (&a + &(&x_bar - &t_sigma).scale(step)).positive_part();
        mu = (mu + step * (x_bar.trace() - cap)).max(T::zero());
        let grad = &(&a - &w) + &eye.scale(mu);
        let x_next = (&x - &grad.scale(step)).positive_part();
        x_bar = &x_next.scale(T::lit(2.0)) - &x;
        x = x_next;
        if iter % PDHG_CHECK_EVERY != 0 {
            continue;
        }
        // The best multiplier for X ≤ tσ given (W, μ) is priced in the whitened frame.
        let dual = w.inner(rho) - mu * cap - t * (&w.conjugate(s) - &sigma.scale(mu)).positive_part().trace();
        if dual > eps {
            *warm = Some(Iterates { x, w, a, mu });
            return Ok(Feasibility::Infeasible);
        }
        let mut cand = clip(&x.conjugate(inv_root.entries()), T::zero(), t).conjugate(s);
        let tr = cand.trace();
        if tr > cap {
            cand = cand.scale(cap / tr);
        }
        let dist = (rho.op() - &cand).trace_norm();
        if dist <= eps {
            *warm = Some(Iterates { x, w, a, mu });
            return Ok(Feasibility::Feasible(cand));
        }
        gap = dist - dual;
    }
    *warm = Some(Iterates { x, w, a, mu });
    Err(Error::NonConvergence {
        iterations: PDHG_MAX_ITERS,
        residual: gap.as_f64(),
    })
}

/// Smoothed `D_max` from bisection on `t = 2^λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DmaxExact<T: Real> {
    pub value_bits: T,
    /// Largest `λ` certified infeasible; the infimum lies in `[lower_bits, value_bits]`.
    pub lower_bits: T,
    /// A point of the ball dominated by `2^value_bits σ`.
    pub witness: HermitianOperator<T>,
}

/// `min_{ρ̄ ∈ B^ε(ρ)} D_max(ρ̄‖σ)` for dimensions up to 16.
///
/// A feasibility solve that fails to converge is treated as infeasible, so
/// the returned value is always backed by an explicit witness.
pub fn smooth_dmax_exact<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &HermitianOperator<T>,
    eps: T,
) -> Result<DmaxExact<T>> {
    if rho.dim() > EXACT_MAX_DIM {
        return Err(Error::SizeGuard(format!(
            "dimension {} exceeds the exact solver limit {EXACT_MAX_DIM}",
            rho.dim()
        )));
    }
    if eps < T::zero() {
        return Err(Error::invalid("smoothing parameter must be non-negative"));
    }
    if eps >= rho.trace() {
        return Err(Error::invalid(
            "the ball contains the zero operator, so the smoothed D_max is unbounded below",
        ));
    }
    let top = finite_d_max(rho, sigma)?;
    if eps == T::zero() {
        return Ok(DmaxExact {
            value_bits: top,
            lower_bits: top,
            witness: rho.op().clone(),
        });
    }
    let two = T::lit(2.0);
    let necessary = |bits: T| (rho.op() - &sigma.scale(two.powf(bits))).positive_part().trace() <= eps;

    // Bracket the threshold of the necessary condition, which is exact for commuting pairs.
    let mut lo = top - T::one();
    let mut guard = 0;
    while necessary(lo) {
        lo -= T::lit(2.0).powi(guard.min(10));
        guard += 1;
        if guard > 200 {
            return Err(Error::NonConvergence {
                iterations: guard as usize,
                residual: f64::INFINITY,
            });
        }
    }
    let mut hi = top;
    while hi - lo > T::tol(EXACT_RESOLUTION_BITS) * T::lit(1e-2) {
        let mid = (lo + hi) / two;
        if necessary(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lower_bits = lo;

    let mut witness = None;
    let mut warm = None;
    let mut value = top;
    let mut certified = lower_bits;
    let mut lo = lower_bits;
    let mut probe = hi;
    loop {
        match feasibility(rho, sigma, eps, two.powf(probe), &mut warm) {
            Ok(Feasibility::Feasible(x)) => {
                value = probe;
                witness = Some(x);
                break;
            }
            outcome @ (Ok(Feasibility::Infeasible) | Err(Error::NonConvergence { .. })) => {
                if matches!(outcome, Ok(Feasibility::Infeasible)) {
                    certified = probe;
                }
                lo = probe;
                probe = (probe + top) / two;
                if top - probe <= T::tol(EXACT_RESOLUTION_BITS) {
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    let mut hi = value;
    while hi - lo > T::tol(EXACT_RESOLUTION_BITS) {
        let mid = (lo + hi) / two;
        match feasibility(rho, sigma, eps, two.powf(mid), &mut warm) {
            Ok(Feasibility::Feasible(x)) => {
                hi = mid;
                witness = Some(x);
            }
            Ok(Feasibility::Infeasible) => {
                certified = mid;
                lo = mid;
            }
            Err(Error::NonConvergence { .. }) => lo = mid,
            Err(e) => return Err(e),
        }
    }
    Ok(DmaxExact {
        value_bits: hi,
        lower_bits: certified,
        witness: witness.unwrap_or_else(|| rho.op().clone()),
    })
}
