//! Type-class bookkeeping for `p^⊗n` and `q^⊗n` on a common basis.
//!
//! Every sequence in one type class has the same probability under both
//! product distributions, so sums over `dⁿ` sequences collapse to sums over
//! `C(n+d−1, d−1)` classes weighted by multinomial coefficients.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest number of type classes enumerated.
pub const MAX_TYPE_CLASSES: usize = 20_000_000;
/// Largest alphabet handled by the fast path.
pub const MAX_ALPHABET: usize = 4;
/// Largest block length handled by the fast path.
pub const MAX_BLOCK: usize = 10_000;
/// Absolute slack (per letter) when comparing summed log-ratios with `nγ`.
pub const LOG_RATIO_QUANTUM: f64 = 1e-9;

/// One type class: multiplicity and per-sequence log-probabilities.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TypeClass<T> {
    /// `ln` of the number of sequences in the class.
    pub ln_count: T,
    /// `ln p^⊗n(x)` for any sequence `x` of the class.
    pub ln_p: T,
    /// `ln q^⊗n(x)`, `−∞` when some letter has `q = 0`.
    pub ln_q: T,
}

impl<T: Real> TypeClass<T> {
    /// `log₂ p(x)/q(x)`, `+∞` when `q(x) = 0`.
    pub fn log_ratio(&self) -> T {
        (self.ln_p - self.ln_q) / T::lit(2f64.ln())
    }

    pub fn p_mass(&self) -> T {
        (self.ln_count + self.ln_p).exp()
    }

    pub fn q_mass(&self) -> T {
        (self.ln_count + self.ln_q).exp()
    }
}

fn ln_or_neg_inf<T: Real>(x: T) -> T {
    if x > T::zero() {
        x.ln()
    } else {
        T::min_value()
            .map(|m| m * T::lit(0.5))
            .unwrap_or_else(|| -T::lit(1e300))
    }
}

pub(crate) fn class_count(alphabet: usize, n: usize) -> Option<usize> {
    // C(n + d − 1, d − 1)
    let mut c: u128 = 1;
    for i in 1..alphabet {
        c = c * (n + i) as u128 / i as u128;
        if c > usize::MAX as u128 {
            return None;
        }
    }
    Some(c as usize)
}

/// Letters of `p` with positive weight; the rest never contribute.
fn letters<T: Real>(p: &[T], q: &[T]) -> Vec<(T, T)> {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > T::zero())
        .map(|(&pi, &qi)| (pi, qi.max(T::zero())))
        .collect()
}

/// All type classes of length `n` over the support of `p`.
pub(crate) fn type_classes<T: Real>(p: &[T], q: &[T], n: usize) -> Result<Vec<TypeClass<T>>> {
    if n == 0 {
        return Err(Error::invalid("block length must be at least 1"));
    }
    let alpha = letters(p, q);
    if alpha.is_empty() {
        return Err(Error::invalid("rho has empty support"));
    }
    if alpha.len() > MAX_ALPHABET || n > MAX_BLOCK {
        return Err(Error::SizeGuard(format!(
            "fast path handles alphabets up to {MAX_ALPHABET} and n up to {MAX_BLOCK} (got {}, {n})",
            alpha.len()
        )));
    }
    let count = class_count(alpha.len(), n).filter(|&c| c <= MAX_TYPE_CLASSES);
    let count = count.ok_or_else(|| Error::SizeGuard(format!("more than {MAX_TYPE_CLASSES} type classes")))?;
    let mut ln_fact = vec![T::zero(); n + 1];
    for k in 1..=n {
        ln_fact[k] = ln_fact[k - 1] + T::lit(k as f64).ln();
    }
    let ln_p: Vec<T> = alpha.iter().map(|a| a.0.ln()).collect();
    let ln_q: Vec<T> = alpha.iter().map(|a| ln_or_neg_inf(a.1)).collect();
    let zero_q: Vec<bool> = alpha.iter().map(|a| a.1 <= T::zero()).collect();
    let mut out = Vec::with_capacity(count);
    let mut counts = vec![0usize; alpha.len()];
    fill(&mut counts, 0, n, &mut |k: &[usize]| {
        let mut lc = ln_fact[n];
        let (mut lp, mut lq) = (T::zero(), T::zero());
        let mut q_dead = false;
        for (i, &ki) in k.iter().enumerate() {
            lc -= ln_fact[ki];
            let kf = T::lit(ki as f64);
            lp += kf * ln_p[i];
            if ki > 0 && zero_q[i] {
                q_dead = true;
            } else {
                lq += kf * ln_q[i];
            }
        }
        out.push(TypeClass {
            ln_count: lc,
            ln_p: lp,
            ln_q: if q_dead { ln_or_neg_inf(T::zero()) } else { lq },
        });
    });
    Ok(out)
}

fn fill(counts: &mut [usize], pos: usize, left: usize, emit: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        emit(counts);
        return;
    }
    for k in 0..=left {
        counts[pos] = k;
        fill(counts, pos + 1, left - k, emit);
    }
}

/// Whether a class lies in `{p^⊗n ≥ 2^{nγ} q^⊗n}`.
pub(crate) fn above<T: Real>(class: &TypeClass<T>, n: usize, gamma_bits: T) -> bool {
    let slack = T::tol(LOG_RATIO_QUANTUM) * T::lit(n as f64);
    class.ln_q <= ln_or_neg_inf(T::zero()) || class.log_ratio() >= T::lit(n as f64) * gamma_bits - slack
}

/// `ln Σ exp(xᵢ)`.
pub(crate) fn log_sum_exp<T: Real>(xs: impl Iterator<Item = T> + Clone) -> T {
    let m = xs.clone().fold(ln_or_neg_inf(T::zero()), T::max);
    if m <= ln_or_neg_inf(T::zero()) {
        return m;
    }
    m + xs.fold(T::zero(), |a, x| a + (x - m).exp()).ln()
}

pub(crate) fn is_neg_inf<T: Real>(x: T) -> bool {
    x <= ln_or_neg_inf(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        assert_eq!(class_count(2, 10), Some(11));
        assert_eq!(class_count(3, 2), Some(6));
        assert_eq!(class_count(4, 10_000), Some(166_766_685_001));
    }

    #[test]
    fn masses_sum_to_one() {
        let cls = type_classes(&[0.6, 0.3, 0.1], &[0.2, 0.3, 0.5], 7).unwrap();
        assert_eq!(cls.len(), 36);
        let p: f64 = cls.iter().map(|c| c.p_mass()).sum();
        let q: f64 = cls.iter().map(|c| c.q_mass()).sum();
        assert!((p - 1.0).abs() < 1e-12 && (q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_letters_drop_out() {
        let cls = type_classes::<f64>(&[0.0, 1.0], &[0.5, 0.5], 4).unwrap();
        assert_eq!(cls.len(), 1);
        assert!((cls[0].q_mass() - 0.0625).abs() < 1e-15);
        let cls = type_classes(&[0.5, 0.5], &[1.0, 0.0], 2).unwrap();
        assert!(cls.iter().filter(|c| is_neg_inf(c.ln_q)).count() == 2);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [-1.0f64, -2.0, -0.5];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(xs.iter().copied()) - direct).abs() < 1e-14);
    }
}
