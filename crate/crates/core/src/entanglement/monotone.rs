use serde::Serialize;

use crate::divergence::relative::d_max;
use crate::entanglement::state::BipartiteState;
use crate::error::Result;
use crate::operator::random::{random_density_with, random_instrument_with, random_unitary_with, seeded};
use crate::operator::{partial_trace, CMatrix, HermitianOperator, Subsystem};
use crate::scalar::Real;

pub const CONDITION_TOL: f64 = 1e-8;

/// One monotone condition evaluated on `D_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub holds: bool,
    /// Amount by which the condition is violated (zero or negative when it holds).
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub conditions: Vec<ConditionCheck>,
}

impl MonotoneReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn bits<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<f64> {
    Ok(d_max(rho, sigma)?.as_f64())
}

fn check(name: &'static str, violation: f64) -> ConditionCheck {
    ConditionCheck {
        name,
        holds: violation <= CONDITION_TOL,
        violation,
    }
}

/// Projector onto columns `cols` of a unitary.
fn column_projector<T: Real>(u: &CMatrix<T>, cols: std::ops::Range<usize>) -> HermitianOperator<T> {
    let sel = u.columns(cols.start, cols.len()).into_owned();
    HermitianOperator::hermitize(&sel * sel.adjoint())
}

/// Checks the six sufficient conditions for an entanglement monotone on
/// `D_max(ρ‖σ)` with randomly drawn `σ`, unitaries, instruments and projectors.
///
/// Condition (v) is reported twice: `v_sum` is the additive decomposition
/// `D(Σ PᵢρPᵢ ‖ Σ PᵢσPᵢ) = Σᵢ D(PᵢρPᵢ ‖ PᵢσPᵢ)`, and `v_max` the same with
/// `maxᵢ` on the right, which is the form `D_max` obeys.
pub fn monotone_condition_suite<T: Real>(rho_ab: &BipartiteState<T>, seed: u64) -> Result<MonotoneReport> {
    let mut rng = seeded(seed, 0x4d4f4e4f);
    let dims = rho_ab.dims();
    let rho = rho_ab.state().op();
    let n = rho.dim();
    let sigma = random_density_with::<T, _>(n, n, &mut rng)?.into_op();
    let base = bits(rho, &sigma)?;
    let mut out = Vec::new();

    let self_div = bits(rho, rho)?;
    let distinct_positive = if sigma.max_abs_diff(rho) > T::lit(1e-6) {
        -base
    } else {
        0.0
    };
    out.push(check("i_nonnegative", distinct_positive.max(self_div.abs())));

    let u = random_unitary_with::<T, _>(n, &mut rng);
    out.push(check(
        "ii_unitary_invariance",
        (bits(&rho.conjugate(&u), &sigma.conjugate(&u))? - base).abs(),
    ));

    let mut worst = f64::NEG_INFINITY;
    for keep in [Subsystem::A, Subsystem::B] {
        let r = partial_trace(rho, dims, keep)?;
        let s = partial_trace(&sigma, dims, keep)?;
        worst = worst.max(bits(&r, &s)? - base);
    }
    out.push(check("iii_partial_trace", worst));

    let instrument = random_instrument_with::<T, _>(n, 2, &mut rng)?;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for v in instrument.elements() {
        let ri = rho.conjugate(v);
        let si = sigma.conjugate(v);
        let (a, b) = (ri.trace(), si.trace());
        lhs += a.as_f64() * bits(&ri.scale(T::one() / a), &si.scale(T::one() / b))?;
        rhs += bits(&ri, &si)?;
    }
    out.push(check("iv_instrument", lhs - rhs));

    let w = random_unitary_with::<T, _>(n, &mut rng);
    let split = 1 + (n - 1) / 2;
    let blocks = [column_projector(&w, 0..split), column_projector(&w, split..n)];
    let mut pinched_rho = HermitianOperator::zeros(n);
    let mut pinched_sigma = HermitianOperator::zeros(n);
    let mut block_sum = 0.0;
    let mut block_max = f64::NEG_INFINITY;
    for p in &blocks {
        let rp = rho.conjugate(p.entries());
        let sp = sigma.conjugate(p.entries());
        pinched_rho = &pinched_rho + &rp;
        pinched_sigma = &pinched_sigma + &sp;
        let d = bits(&rp, &sp)?;
        block_sum += d;
        block_max = block_max.max(d);
    }
    let pinched = bits(&pinched_rho, &pinched_sigma)?;
    out.push(check("v_sum", (pinched - block_sum).abs()));
    out.push(check("v_max", (pinched - block_max).abs()));

    let k = 3;
    let q = random_unitary_with::<T, _>(k, &mut rng);
    let p = column_projector(&q, 0..2);
    out.push(check(
        "vi_tensor_projector",
        (bits(&rho.kron(&p), &sigma.kron(&p))? - base).abs(),
    ));

    Ok(MonotoneReport { conditions: out })
}
