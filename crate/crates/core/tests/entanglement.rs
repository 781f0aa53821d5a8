use qdiv_core::divergence::d_max;
use qdiv_core::entanglement::{
    emax, is_ppt, isotropic, maximally_entangled, monotone_condition_suite, ppt_emax_lower, BipartiteState, EmaxConfig,
};
use qdiv_core::operator::random::{random_density, random_pure_bipartite};

/// `E_max` of `v Φ + (1 − v) I/d²` is `log₂(d F)` with `F = ⟨Φ|ρ|Φ⟩`, and zero once `F ≤ 1/d`.
fn isotropic_oracle(d: usize, v: f64) -> f64 {
    let f = v + (1.0 - v) / (d * d) as f64;
    (d as f64 * f).log2().max(0.0)
}

fn config(dims: (usize, usize), seed: u64) -> EmaxConfig {
    EmaxConfig {
        seed,
        ..EmaxConfig::for_dims(dims)
    }
}

#[test]
fn bell_state_has_one_bit() {
    let bell = maximally_entangled::<f64>(2);
    let r = emax(&bell, &config((2, 2), 1)).unwrap();
    assert!((0.99..=1.01).contains(&r.upper_bits), "{r:?}");
    assert!((0.99..=1.01).contains(&r.lower_bits), "{r:?}");
    assert!(r.gap <= 1e-2);
    assert!(r.ppt_certified);
}

#[test]
fn isotropic_states_match_closed_form() {
    for v in [0.9, 0.6, 0.2] {
        let rho = isotropic::<f64>(2, v).unwrap();
        let oracle = isotropic_oracle(2, v);
        let lower = ppt_emax_lower(&rho).unwrap().lower_bits;
        assert!((lower - oracle).abs() < 1e-3, "v = {v}: ppt {lower} vs {oracle}");
        let r = emax(&rho, &config((2, 2), 2)).unwrap();
        assert!(
            r.upper_bits >= oracle - 1e-6,
            "v = {v}: upper {} below {oracle}",
            r.upper_bits
        );
        assert!(
            r.upper_bits - oracle < 1e-2,
            "v = {v}: upper {} vs {oracle}",
            r.upper_bits
        );
    }
}

#[test]
fn witness_certifies_upper_bound() {
    let rho = BipartiteState::new(random_pure_bipartite::<f64>(2, 3, 5).unwrap(), (2, 3)).unwrap();
    let r = emax(&rho, &config((2, 3), 3)).unwrap();
    let sigma = r.witness.assemble();
    let direct = d_max(rho.state(), &sigma).unwrap().expect_finite("witness");
    assert!((direct - r.upper_bits).abs() < 1e-9);
    assert!(r.lower_bits <= r.upper_bits + 1e-9);
}

#[test]
fn product_states_are_unentangled() {
    let a = random_density::<f64>(2, 2, 11).unwrap();
    let b = random_density::<f64>(2, 1, 12).unwrap();
    let rho = BipartiteState::product(&a, &b);
    assert!(is_ppt(&rho));
    let r = emax(&rho, &config((2, 2), 4)).unwrap();
    assert!(r.upper_bits.abs() < 1e-3, "{r:?}");
}

#[test]
fn random_two_qubit_states_respect_ppt_ordering() {
    for seed in 0..6u64 {
        let rho = BipartiteState::new(random_density::<f64>(4, 1 + seed as usize % 4, seed).unwrap(), (2, 2)).unwrap();
        let r = emax(&rho, &config((2, 2), seed)).unwrap();
        let lower = ppt_emax_lower(&rho).unwrap().lower_bits;
        assert!(lower <= r.upper_bits + 1e-8, "seed {seed}: {lower} > {}", r.upper_bits);
    }
}

#[test]
fn monotone_conditions_other_than_additive_sum() {
    let rho = BipartiteState::new(random_density::<f64>(4, 2, 21).unwrap(), (2, 2)).unwrap();
    let report = monotone_condition_suite(&rho, 21).unwrap();
    for c in report.conditions.iter().filter(|c| c.name != "v_sum") {
        assert!(c.holds, "{} violated by {}", c.name, c.violation);
    }
}
