//! Frank–Wolfe search over separable states.
//!
//! The iterate is an explicit ensemble of pure product atoms. Each step asks
//! a linear minimization oracle for the product state most aligned with the
//! (negative) gradient, line-searches toward it on the true objective, then
//! re-optimizes all weights on the simplex.

use rand::Rng;

use crate::entanglement::state::SeparableEnsemble;
use crate::error::Result;
use crate::operator::random::random_pure_vector_with;
use crate::operator::{CMatrix, CVector, HermitianOperator};
use crate::scalar::{creal, Real};

/// Weight of the maximally mixed state mixed into every evaluated witness.
pub const BARRIER_WEIGHT: f64 = 1e-6;

/// Objective on the separable set: value (`None` when infinite) and a
/// gradient with respect to `σ`.
pub(crate) trait SeparableObjective<T: Real> {
    fn value(&self, sigma: &HermitianOperator<T>) -> Option<T>;
    fn gradient(&self, sigma: &HermitianOperator<T>) -> HermitianOperator<T>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of product atoms kept (excluding barrier atoms).
    pub terms: usize,
    pub restarts: usize,
    pub iters: usize,
}

#[derive(Clone)]
pub(crate) struct Atom<T: Real> {
    a: CVector<T>,
    b: CVector<T>,
    proj: HermitianOperator<T>,
}

impl<T: Real> Atom<T> {
    fn new(a: CVector<T>, b: CVector<T>) -> Self {
        let proj = HermitianOperator::ket_bra(&a.kronecker(&b));
        Self { a, b, proj }
    }
}

pub(crate) struct SearchOutcome<T: Real> {
    pub ensemble: SeparableEnsemble<T>,
}

fn basis<T: Real>(d: usize, i: usize) -> CVector<T> {
    let mut v = CVector::zeros(d);
    v[i] = creal(T::one());
    v
}

fn assemble<T: Real>(atoms: &[Atom<T>], w: &[T], barrier: &HermitianOperator<T>) -> HermitianOperator<T> {
    let n = barrier.dim();
    let mut acc = HermitianOperator::zeros(n);
    let keep = T::one() - T::lit(BARRIER_WEIGHT);
    for (atom, &wk) in atoms.iter().zip(w) {
        acc = &acc + &atom.proj.scale(wk * keep);
    }
    &acc + barrier
}

/// Top eigenvector of a Hermitian matrix given as raw entries.
fn top_vector<T: Real>(m: CMatrix<T>) -> CVector<T> {
    let op = HermitianOperator::hermitize(m);
    op.eig().vector(0)
}

/// Maximizes `⟨a⊗b|M|a⊗b⟩` over unit product vectors by alternating
/// top-eigenvector updates from a starting `b`.
fn seesaw<T: Real>(m: &HermitianOperator<T>, dims: (usize, usize), mut b: CVector<T>) -> (CVector<T>, CVector<T>, T) {
    let (da, db) = dims;
    let e = m.entries();
    let mut a = CVector::zeros(da);
    let mut last = T::min_value().unwrap_or_else(|| -T::one());
    for _ in 0..200 {
        let ma = CMatrix::from_fn(da, da, |i, k| {
            let mut s = creal(T::zero());
            for j in 0..db {
                for l in 0..db {
                    s += b[j].conj() * e[(i * db + j, k * db + l)] * b[l];
                }
            }
            s
        });
        a = top_vector(ma);
        let mb = CMatrix::from_fn(db, db, |j, l| {
            let mut s = creal(T::zero());
            for i in 0..da {
                for k in 0..da {
                    s += a[i].conj() * e[(i * db + j, k * db + l)] * a[k];
                }
            }
            s
        });
        b = top_vector(mb.clone());
        let val = (b.adjoint() * &mb * &b)[(0, 0)].re;
        if (val - last).abs() <= T::lit(1e-13) * T::one().max(val.abs()) {
            last = val;
            break;
        }
        last = val;
    }
    (a, b, last)
}

/// Best product vector for `M` from several seesaw starts: the right
/// singular vectors of reshaped top eigenvectors plus random vectors.
fn product_oracle<T: Real, R: Rng + ?Sized>(
    m: &HermitianOperator<T>,
    dims: (usize, usize),
    rng: &mut R,
) -> (CVector<T>, CVector<T>) {
    let (da, db) = dims;
    let spec = m.eig();
    let mut starts = Vec::new();
    for k in 0..2.min(spec.dim()) {
        let v = spec.vector(k);
        let reshaped = CMatrix::from_fn(da, db, |i, j| v[i * db + j]);
        let svd = reshaped.svd(false, true);
        if let Some(vt) = svd.v_t {
            starts.push(vt.row(0).transpose());
        }
    }
    starts.push(random_pure_vector_with(db, rng));
    starts.push(random_pure_vector_with(db, rng));
    let mut best: Option<(CVector<T>, CVector<T>, T)> = None;
    for b0 in starts {
        let cand = seesaw(m, dims, b0);
        if best.as_ref().is_none_or(|b| cand.2 > b.2) {
            best = Some(cand);
        }
    }
    let (a, b, _) = best.expect("at least one start");
    (a, b)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = T::zero();
    let mut theta = T::zero();
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - T::one()) / T::lit((k + 1) as f64);
        if x - t > T::zero() {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

/// Golden-section minimization of `f` on `[0, hi]`, also comparing the endpoints.
fn golden<T: Real>(mut f: impl FnMut(T) -> Option<T>, hi: T, iters: usize) -> (T, T) {
    let big = |v: Option<T>| v.unwrap_or_else(|| T::max_value().unwrap_or_else(T::one));
    let g = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut lo, mut up) = (T::zero(), hi);
    let mut x1 = up - g * (up - lo);
    let mut x2 = lo + g * (up - lo);
    let (mut f1, mut f2) = (big(f(x1)), big(f(x2)));
    for _ in 0..iters {
        if f1 <= f2 {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - g * (up - lo);
            f1 = big(f(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (up - lo);
            f2 = big(f(x2));
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [T::zero(), hi] {
        let v = big(f(x));
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

struct Search<'a, T: Real, O: SeparableObjective<T>> {
    objective: &'a O,
    dims: (usize, usize),
    barrier: HermitianOperator<T>,
    atoms: Vec<Atom<T>>,
    weights: Vec<T>,
    value: T,
}

impl<T: Real, O: SeparableObjective<T>> Search<'_, T, O> {
    fn sigma_for(&self, w: &[T]) -> HermitianOperator<T> {
        assemble(&self.atoms, w, &self.barrier)
    }

    fn eval(&self, w: &[T]) -> Option<T> {
        self.objective.value(&self.sigma_for(w))
    }

    fn frank_wolfe_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let sigma = self.sigma_for(&self.weights);
        let grad = self.objective.gradient(&sigma);
        let (a, b) = product_oracle(&(-&grad), self.dims, rng);
        self.atoms.push(Atom::new(a, b));
        self.weights.push(T::zero());
        let k = self.weights.len() - 1;
        let base = self.weights.clone();
        let mix = |g: T| -> Vec<T> {
            let mut w: Vec<T> = base.iter().map(|&x| x * (T::one() - g)).collect();
            w[k] = g;
            w
        };
        let (g, v) = golden(|g| self.eval(&mix(g)), T::one(), 60);
        if v < self.value {
            self.weights = mix(g);
            self.value = v;
        }
    }

    /// Projected-gradient passes over all weights with a line search on the true objective.
    fn corrective(&mut self, passes: usize) {
        for _ in 0..passes {
            let sigma = self.sigma_for(&self.weights);
            let grad = self.objective.gradient(&sigma);
            let g: Vec<T> = self.atoms.iter().map(|a| a.proj.inner(&grad)).collect();
            let scale = g.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if scale <= T::zero() {
                return;
            }
            let base = self.weights.clone();
            let target = |step: T| -> Vec<T> {
                let moved: Vec<T> = base.iter().zip(&g).map(|(&w, &gk)| w - step * gk / scale).collect();
                project_simplex(&moved)
            };
            let (step, v) = golden(|s| self.eval(&target(s)), T::one(), 40);
            if v < self.value {
                self.weights = target(step);
                self.value = v;
            } else {
                return;
            }
        }
    }

    fn prune(&mut self, max_terms: usize) {
        let mut order: Vec<usize> = (0..self.weights.len()).collect();
        order.sort_by(|&i, &j| {
            self.weights[j]
                .partial_cmp(&self.weights[i])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let keep: Vec<usize> = order
            .into_iter()
            .filter(|&i| self.weights[i] > T::lit(1e-14))
            .take(max_terms)
            .collect();
        if keep.len() == self.weights.len() {
            return;
        }
        let total = keep.iter().fold(T::zero(), |s, &i| s + self.weights[i]);
        let atoms: Vec<Atom<T>> = keep.iter().map(|&i| self.atoms[i].clone()).collect();
        let weights: Vec<T> = keep.iter().map(|&i| self.weights[i] / total).collect();
        if let Some(v) = self.objective.value(&assemble(&atoms, &weights, &self.barrier)) {
            self.atoms = atoms;
            self.weights = weights;
            self.value = v;
        }
    }

    fn ensemble(&self) -> Result<SeparableEnsemble<T>> {
        let parts = self
            .atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, &w)| (w, a.a.clone(), a.b.clone()))
            .collect();
        with_barrier(self.dims, parts)
    }
}

/// Ensemble `(1 − b) Σ wₖ aₖbₖ + b I/d` with the barrier as explicit basis atoms.
pub(crate) fn with_barrier<T: Real>(
    dims: (usize, usize),
    parts: Vec<(T, CVector<T>, CVector<T>)>,
) -> Result<SeparableEnsemble<T>> {
    let (da, db) = dims;
    let d = T::lit((da * db) as f64);
    let total = parts.iter().fold(T::zero(), |s, p| s + p.0.max(T::zero()));
    let keep = (T::one() - T::lit(BARRIER_WEIGHT)) / total;
    let mut parts: Vec<(T, CVector<T>, CVector<T>)> = parts
        .into_iter()
        .filter(|p| p.0 > T::zero())
        .map(|(w, a, b)| (w * keep, a, b))
        .collect();
    for i in 0..da {
        for j in 0..db {
            parts.push((T::lit(BARRIER_WEIGHT) / d, basis(da, i), basis(db, j)));
        }
    }
    SeparableEnsemble::from_parts(dims, parts)
}

/// Minimizes the objective over separable states, returning the best
/// value and its witness (barrier atoms included).
pub(crate) fn minimize<T: Real, O: SeparableObjective<T>, R: Rng + ?Sized>(
    objective: &O,
    dims: (usize, usize),
    config: &SearchConfig,
    init: &[(T, CVector<T>, CVector<T>)],
    rng: &mut R,
) -> Result<SearchOutcome<T>> {
    let (da, db) = dims;
    let n = da * db;
    let barrier = HermitianOperator::identity(n).scale(T::lit(BARRIER_WEIGHT) / T::lit(n as f64));
    let mut best: Option<Search<T, O>> = None;
    for restart in 0..config.restarts.max(1) {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        if restart == 0 {
            for i in 0..da {
                for j in 0..db {
                    atoms.push(Atom::new(basis(da, i), basis(db, j)));
                    weights.push(T::one() / T::lit(n as f64));
                }
            }
            if !init.is_empty() {
                atoms.clear();
                weights.clear();
                for (w, a, b) in init {
                    atoms.push(Atom::new(a.clone(), b.clone()));
                    weights.push(*w);
                }
            }
        } else {
            for _ in 0..n {
                atoms.push(Atom::new(
                    random_pure_vector_with(da, rng),
                    random_pure_vector_with(db, rng),
                ));
            }
            for i in 0..da {
                for j in 0..db {
                    atoms.push(Atom::new(basis(da, i), basis(db, j)));
                }
            }
            let k = atoms.len();
            weights = vec![T::one() / T::lit(k as f64); k];
        }
        let mut search = Search {
            objective,
            dims,
            barrier: barrier.clone(),
            atoms,
            weights,
            value: T::zero(),
        };
        search.value = search
            .eval(&search.weights)
            .unwrap_or_else(|| T::max_value().unwrap_or_else(T::one));
        let mut stall = 0;
        for _ in 0..config.iters {
            let before = search.value;
            search.frank_wolfe_step(rng);
            search.corrective(8);
            search.prune(config.terms);
            if before - search.value <= T::lit(1e-11) * T::one().max(before.abs()) {
                stall += 1;
                if stall >= 15 {
                    break;
                }
            } else {
                stall = 0;
            }
        }
        if best.as_ref().is_none_or(|b| search.value < b.value) {
            best = Some(search);
        }
    }
    let best = best.expect("at least one restart");
    Ok(SearchOutcome {
        ensemble: best.ensemble()?,
    })
}

/// Product-atom decomposition of a target operator.
pub(crate) struct Decomposition<T: Real> {
    pub parts: Vec<(T, CVector<T>, CVector<T>)>,
}

/// Minimizes `½ wᵀ G w − cᵀ w` over the probability simplex (accelerated projected gradient).
fn simplex_qp<T: Real>(g: &[Vec<T>], c: &[T], w0: &[T], iters: usize) -> Vec<T> {
    let k = c.len();
    let lip = g
        .iter()
        .map(|row| row.iter().fold(T::zero(), |a, x| a + x.abs()))
        .fold(T::zero(), T::max)
        .max(T::default_epsilon());
    let grad = |w: &[T]| -> Vec<T> {
        (0..k)
            .map(|i| (0..k).fold(T::zero(), |a, j| a + g[i][j] * w[j]) - c[i])
            .collect()
    };
    let mut w = w0.to_vec();
    let mut y = w.clone();
    let mut t = T::one();
    for _ in 0..iters {
        let gy = grad(&y);
        let next = project_simplex(&y.iter().zip(&gy).map(|(&a, &b)| a - b / lip).collect::<Vec<_>>());
        let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
        let beta = (t - T::one()) / t_next;
        y = next.iter().zip(&w).map(|(&n, &o)| n + beta * (n - o)).collect();
        w = next;
        t = t_next;
    }
    w
}

/// Fully-corrective Frank–Wolfe for `min ½‖σ − τ‖²_F` over separable states,
/// where `τ` is a normalized state. Linear convergence is expected when `τ`
/// lies in the interior of the separable set.
pub(crate) fn decompose<T: Real, R: Rng + ?Sized>(
    target: &HermitianOperator<T>,
    dims: (usize, usize),
    warm: &[(T, CVector<T>, CVector<T>)],
    iters: usize,
    tol: T,
    rng: &mut R,
) -> Decomposition<T> {
    let mut atoms: Vec<Atom<T>> = warm.iter().map(|(_, a, b)| Atom::new(a.clone(), b.clone())).collect();
    let mut weights: Vec<T> = warm.iter().map(|p| p.0).collect();
    if atoms.is_empty() {
        let (a, b) = product_oracle(target, dims, rng);
        atoms.push(Atom::new(a, b));
        weights.push(T::one());
    }
    let n = target.dim();
    let build = |atoms: &[Atom<T>], w: &[T]| {
        let mut acc = HermitianOperator::zeros(n);
        for (atom, &wk) in atoms.iter().zip(w) {
            acc = &acc + &atom.proj.scale(wk);
        }
        acc
    };
    let mut residual = (target - &build(&atoms, &weights)).operator_norm();
    for _ in 0..iters {
        if residual <= tol {
            break;
        }
        let sigma = build(&atoms, &weights);
        let r = target - &sigma;
        let (a, b) = product_oracle(&r, dims, rng);
        let cand = Atom::new(a, b);
        if cand.proj.inner(&r) - sigma.inner(&r) <= T::lit(1e-16) {
            break;
        }
        atoms.push(cand);
        weights.push(T::zero());
        let k = atoms.len();
        let gram: Vec<Vec<T>> = (0..k)
            .map(|i| (0..k).map(|j| atoms[i].proj.inner(&atoms[j].proj)).collect())
            .collect();
        let c: Vec<T> = atoms.iter().map(|at| at.proj.inner(target)).collect();
        weights = simplex_qp(&gram, &c, &weights, 400);
        let keep: Vec<usize> = (0..k).filter(|&i| weights[i] > T::zero()).collect();
        atoms = keep.iter().map(|&i| atoms[i].clone()).collect();
        weights = keep.iter().map(|&i| weights[i]).collect();
        if atoms.len() > 2 * n * n {
            let parts = atoms
                .iter()
                .zip(&weights)
                .map(|(at, &w)| (w, at.a.clone(), at.b.clone()))
                .collect();
            let reduced = caratheodory(parts);
            weights = reduced.iter().map(|p| p.0).collect();
            atoms = reduced.into_iter().map(|(_, a, b)| Atom::new(a, b)).collect();
        }
        residual = (target - &build(&atoms, &weights)).operator_norm();
    }
    Decomposition {
        parts: atoms.into_iter().zip(weights).map(|(at, w)| (w, at.a, at.b)).collect(),
    }
}

/// Real coordinates of a Hermitian matrix: diagonal, then upper real and imaginary parts.
fn real_coords<T: Real>(m: &HermitianOperator<T>) -> Vec<T> {
    let n = m.dim();
    let e = m.entries();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(e[(i, i)].re);
        for j in i + 1..n {
            out.push(e[(i, j)].re);
            out.push(e[(i, j)].im);
        }
    }
    out
}

/// Carathéodory reduction: rewrites `Σ wₖ Pₖ` with at most `d²` atoms,
/// leaving the assembled operator unchanged up to rounding.
pub(crate) fn caratheodory<T: Real>(parts: Vec<(T, CVector<T>, CVector<T>)>) -> Vec<(T, CVector<T>, CVector<T>)> {
    let mut parts: Vec<_> = parts.into_iter().filter(|p| p.0 > T::zero()).collect();
    let Some(first) = parts.first() else {
        return parts;
    };
    let n = first.1.len() * first.2.len();
    let limit = n * n;
    let coords: Vec<Vec<T>> = parts
        .iter()
        .map(|(_, a, b)| real_coords(&HermitianOperator::ket_bra(&a.kronecker(b))))
        .collect();
    let mut coords = coords;
    while parts.len() > limit {
        // Any limit + 1 atoms are affinely dependent; the padding row of ones is the trace.
        let k = limit + 1;
        let m = nalgebra::DMatrix::<T>::from_fn(k, k, |r, c| if r < limit { coords[c][r] } else { T::one() });
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let (mut idx, mut smallest) = (0, svd.singular_values[0]);
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s < smallest {
                smallest = s;
                idx = i;
            }
        }
        let c: Vec<T> = (0..k).map(|j| v_t[(idx, j)]).collect();
        let c: Vec<T> = if c.iter().fold(T::zero(), |a, &x| a + x.max(T::zero())) > T::zero() {
            c
        } else {
            c.iter().map(|&x| -x).collect()
        };
        let mut alpha = T::max_value().unwrap_or_else(T::one);
        let mut out = 0;
        for j in 0..k {
            if c[j] > T::zero() && parts[j].0 / c[j] < alpha {
                alpha = parts[j].0 / c[j];
                out = j;
            }
        }
        for j in 0..k {
            parts[j].0 = (parts[j].0 - alpha * c[j]).max(T::zero());
        }
        parts[out].0 = T::zero();
        let keep: Vec<bool> = parts.iter().map(|p| p.0 > T::zero()).collect();
        let mut it = keep.iter();
        parts.retain(|_| *it.next().expect("same length"));
        let mut it = keep.iter();
        coords.retain(|_| *it.next().expect("same length"));
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cabs;

    fn overlap<T: Real>(x: &CVector<T>, y: &CVector<T>) -> T {
        let c = cabs(x.dotc(y));
        c * c
    }
    use crate::operator::random::{random_hermitian, seeded};

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.8, -0.2]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[1] - p[0] - 0.3).abs() < 1e-12);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn seesaw_finds_best_product_of_rank_one() {
        // For M = |ψ⟩⟨ψ| the optimum is the largest squared Schmidt coefficient.
        let mut rng = seeded(4, 0);
        for _ in 0..10 {
            let psi: CVector<f64> = random_pure_vector_with(6, &mut rng);
            let m = HermitianOperator::ket_bra(&psi);
            let reshaped = CMatrix::from_fn(2, 3, |i, j| psi[i * 3 + j]);
            let s_max = reshaped.singular_values()[0];
            let (a, b) = product_oracle(&m, (2, 3), &mut rng);
            assert!((overlap(&a.kronecker(&b), &psi) - s_max * s_max).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_beats_random_products() {
        let mut rng = seeded(5, 0);
        let m: HermitianOperator<f64> = random_hermitian(4, &mut rng);
        let (a, b) = product_oracle(&m, (2, 2), &mut rng);
        let best = m.inner(&HermitianOperator::ket_bra(&a.kronecker(&b)));
        for _ in 0..200 {
            let x = random_pure_vector_with::<f64, _>(2, &mut rng).kronecker(&random_pure_vector_with(2, &mut rng));
            assert!(m.inner(&HermitianOperator::ket_bra(&x)) <= best + 1e-9);
        }
    }

    #[test]
    fn caratheodory_preserves_the_mixture() {
        let mut rng = seeded(77, 0);
        let parts: Vec<(f64, CVector<f64>, CVector<f64>)> = (0..40)
            .map(|_| {
                (
                    rng.random::<f64>() + 0.01,
                    random_pure_vector_with(2, &mut rng),
                    random_pure_vector_with(2, &mut rng),
                )
            })
            .collect();
        let build = |p: &[(f64, CVector<f64>, CVector<f64>)]| {
            p.iter().fold(HermitianOperator::zeros(4), |acc, (w, a, b)| {
                &acc + &HermitianOperator::ket_bra(&a.kronecker(b)).scale(*w)
            })
        };
        let before = build(&parts);
        let reduced = caratheodory(parts);
        assert!(reduced.len() <= 16);
        assert!(reduced.iter().all(|p| p.0 > 0.0));
        assert!(build(&reduced).max_abs_diff(&before) < 1e-10);
    }
}
