use proptest::prelude::*;

use qdiv_core::divergence::{d_max, d_min, DivergenceValue};
use qdiv_core::operator::random::random_density;
use qdiv_core::operator::DensityOperator;
use qdiv_core::smoothing::{
    lemma5_smooth, smooth_dmax_exact, smooth_dmax_upper, smooth_dmin_exact_classical, EpsilonBall,
};

fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn diag(w: &[f64]) -> DensityOperator<f64> {
    DensityOperator::from_diagonal(w).unwrap()
}

/// For commuting pairs the ball point `min(p, tq)` is optimal, so the smoothed
/// `D_max` is `log₂` of the least `t` with `Σ (p − tq)₊ ≤ ε`.
fn budget_oracle(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let excess = |t: f64| -> f64 { p.iter().zip(q).map(|(a, b)| (a - t * b).max(0.0)).sum() };
    let (mut lo, mut hi) = (0.0f64, p.iter().zip(q).map(|(a, b)| a / b).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.log2()
}

#[test]
fn benchmark_smooth_dmax() {
    let r = smooth_dmax_exact(&diag(&[0.9, 0.1]), &diag(&[0.5, 0.5]), 0.2).unwrap();
    assert!((r.value_bits - 1.4f64.log2()).abs() < 1e-3, "{}", r.value_bits);
    assert!((r.value_bits - budget_oracle(&[0.9, 0.1], &[0.5, 0.5], 0.2)).abs() < 1e-4);
}

#[test]
fn benchmark_smooth_dmin() {
    let v = smooth_dmin_exact_classical(&[0.9, 0.1], &[0.5, 0.5], 0.25).unwrap();
    assert_eq!(v, DivergenceValue::Finite(1.0));
    // deleting 0.1 of the mass is allowed, deleting 0.9 is not
    let tight = smooth_dmin_exact_classical(&[0.9, 0.1], &[0.5, 0.5], 0.05).unwrap();
    assert_eq!(tight, DivergenceValue::Finite(0.0));
}

#[test]
fn zero_smoothing_reduces_to_dmin() {
    let (p, q) = ([0.6, 0.4, 0.0], [0.2, 0.3, 0.5]);
    let exact = smooth_dmin_exact_classical(&p, &q, 0.0).unwrap();
    let unsmoothed = d_min(&diag(&p), &diag(&q)).unwrap();
    assert!(exact.le_within(&unsmoothed, 1e-12) && unsmoothed.le_within(&exact, 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn commuting_smoothing_matches_budget_oracle(
        p in prop::collection::vec(0.01f64..1.0, 2..=5),
        q in prop::collection::vec(0.01f64..1.0, 5),
        eps in 0.01f64..0.5,
    ) {
        let p = normalize(&p);
        let q = normalize(&q[..p.len()]);
        let r = smooth_dmax_exact(&diag(&p), &diag(&q), eps).unwrap();
        let oracle = budget_oracle(&p, &q, eps);
        prop_assert!((r.value_bits - oracle).abs() < 1e-4, "{} vs {oracle}", r.value_bits);
        prop_assert!(r.lower_bits <= r.value_bits);
    }

    #[test]
    fn exact_witness_is_certified(d in 2usize..=4, seed in any::<u64>(), eps in 0.02f64..0.4) {
        let rho = random_density::<f64>(d, d, seed).unwrap();
        let sigma = random_density::<f64>(d, d, !seed).unwrap();
        let r = smooth_dmax_exact(&rho, &sigma, eps).unwrap();
        prop_assert!(EpsilonBall::new(rho.clone(), eps).contains(&r.witness));
        let witness_bits = d_max(&r.witness, &sigma).unwrap().expect_finite("witness");
        prop_assert!(witness_bits <= r.value_bits + 1e-7);
        prop_assert!(r.value_bits <= d_max(&rho, &sigma).unwrap().expect_finite("d_max") + 1e-9);
        let upper = smooth_dmax_upper(&rho, &sigma, eps).unwrap();
        upper.certificate.verify(&rho, &sigma).unwrap();
        prop_assert!(r.value_bits <= upper.lambda_bits + 1e-4);
    }

    #[test]
    fn certificate_holds_at_every_lambda(d in 2usize..=5, seed in any::<u64>(), shift in 0.0f64..3.0) {
        let rho = random_density::<f64>(d, 1 + (seed as usize) % d, seed).unwrap();
        let sigma = random_density::<f64>(d, d, !seed).unwrap();
        let lambda = d_max(&rho, &sigma).unwrap().expect_finite("d_max") - shift;
        let cert = lemma5_smooth(&rho, &sigma, lambda).unwrap();
        cert.verify(&rho, &sigma).unwrap();
        prop_assert!(cert.transform_trace_dist <= (8.0 * cert.delta.trace()).sqrt() + 1e-7);
    }

    #[test]
    fn smooth_dmin_grows_with_eps(
        p in prop::collection::vec(0.0f64..1.0, 2..=6),
        q in prop::collection::vec(0.01f64..1.0, 6),
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        prop_assume!(p.iter().any(|&x| x > 0.0));
        let p = normalize(&p);
        let q = normalize(&q[..p.len()]);
        let (small, large) = (a.min(b), a.max(b));
        let lo = smooth_dmin_exact_classical(&p, &q, small).unwrap();
        let hi = smooth_dmin_exact_classical(&p, &q, large).unwrap();
        prop_assert!(lo.le_within(&hi, 1e-12));
    }
}
