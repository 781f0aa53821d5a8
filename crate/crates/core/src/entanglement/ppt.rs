use crate::entanglement::state::BipartiteState;
use crate::error::{Error, Result};
use crate::operator::{DensityOperator, HermitianOperator, Subsystem};
use crate::scalar::Real;

/// Minimum eigenvalue of the partial transpose accepted as non-negative.
pub const PPT_TOL: f64 = 1e-9;
pub const PPT_MAX_DIM: usize = 16;
pub const ADMM_MAX_ITERS: usize = 50_000;
/// Relative gap between primal objective and certified dual bound at which ADMM stops.
pub const ADMM_GAP_TOL: f64 = 1e-7;

pub fn is_ppt<T: Real>(rho: &BipartiteState<T>) -> bool {
    rho.partial_transpose(Subsystem::B).min_eigenvalue() >= -T::tol(PPT_TOL)
}

/// Certified lower bound on `E_max` from the PPT relaxation
/// `min { log₂ t : ρ ≤ tσ, σ ≥ 0, σ^{T_B} ≥ 0, Tr σ = 1 }`.
#[derive(Clone, Debug, PartialEq)]
pub struct PptBound<T: Real> {
    /// `log₂` of the certified dual value.
    pub lower_bits: T,
    /// `log₂ Tr X` for the final primal iterate.
    pub primal_bits: T,
    /// The primal PPT state `X / Tr X`.
    pub sigma: DensityOperator<T>,
    pub iterations: usize,
}

/// Solves `min Tr X` s.t. `X ⪰ ρ`, `X^{T_B} ⪰ 0` by ADMM.
///
/// Any `A, B ⪰ 0` with `A + B^{T_B} ⪯ I` certify `Tr X ≥ Tr(Aρ)`; the
/// bound is built from the scaled dual iterates, rescaled to feasibility.
pub fn ppt_emax_lower<T: Real>(rho: &BipartiteState<T>) -> Result<PptBound<T>> {
    rho.require_entangleable()?;
    let n = rho.state().dim();
    if n > PPT_MAX_DIM {
        return Err(Error::SizeGuard(format!(
            "PPT bound limited to dimension {PPT_MAX_DIM}, got {n}"
        )));
    }
    let dims = rho.dims();
    let gamma =
        |x: &HermitianOperator<T>| crate::operator::partial_transpose(x, dims, Subsystem::B).expect("dims validated");
    let r = rho.state().op().clone();
    let step = T::one();
    let half = T::lit(0.5);
    let id_over_r = HermitianOperator::identity(n).scale(T::one() / step);

    let mut x = r.clone();
    let mut u = HermitianOperator::zeros(n);
    let mut w = gamma(&r).positive_part();
    let mut y1 = HermitianOperator::zeros(n);
    let mut y2 = HermitianOperator::zeros(n);
    let mut best_lower = T::zero();
    let mut gap = T::max_value().unwrap_or_else(T::one);
    let mut iterations = 0;
    for it in 1..=ADMM_MAX_ITERS {
        iterations = it;
        let target = &(&(&r + &u) - &y1) + &gamma(&(&w - &y2));
        x = (&target - &id_over_r).scale(half);
        let gx = gamma(&x);
        u = (&(&x - &r) + &y1).positive_part();
        w = (&gx + &y2).positive_part();
        y1 = &y1 + &(&(&x - &r) - &u);
        y2 = &y2 + &(&gx - &w);

        if it % 20 == 0 {
            let a = y1.scale(-step).positive_part();
            let b = y2.scale(-step).positive_part();
            let s = (&a + &gamma(&b)).max_eigenvalue();
            if s > T::zero() {
                best_lower = best_lower.max(a.inner(&r) / s);
            }
            let primal = feasible_primal(&x, &r, dims);
            gap = (primal.trace() - best_lower) / primal.trace();
            if best_lower > T::zero() && gap <= T::tol(ADMM_GAP_TOL) {
                break;
            }
        }
    }
    if !best_lower.is_finite() || best_lower <= T::zero() || gap > T::tol(1e-4) {
        return Err(Error::NonConvergence {
            iterations,
            residual: gap.as_f64(),
        });
    }
    let primal = feasible_primal(&x, &r, dims);
    let tr = primal.trace();
    Ok(PptBound {
        lower_bits: best_lower.log2(),
        primal_bits: tr.log2(),
        sigma: DensityOperator::normalize_from(primal)?,
        iterations,
    })
}

/// Repairs a nearly feasible iterate: mixes in enough identity that both
/// `X ⪰ ρ` and `X^{T_B} ⪰ 0` hold exactly.
fn feasible_primal<T: Real>(
    x: &HermitianOperator<T>,
    r: &HermitianOperator<T>,
    dims: (usize, usize),
) -> HermitianOperator<T> {
    let n = x.dim();
    let pt = crate::operator::partial_transpose(x, dims, Subsystem::B).expect("dims validated");
    let shift = (-(x - r).min_eigenvalue()).max(-pt.min_eigenvalue()).max(T::zero());
    x + &HermitianOperator::identity(n).scale(shift)
}
