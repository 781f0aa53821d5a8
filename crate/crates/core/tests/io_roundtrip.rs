use proptest::prelude::*;

use qdiv_core::entanglement::BipartiteState;
use qdiv_core::io::{parse_operator_file, parse_state_file, write_operator_file, StateFile};
use qdiv_core::operator::random::{random_density, random_positive_with, seeded};
use qdiv_core::Error;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn states_survive_write_then_parse(d in 1usize..=8, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rho.json");
        let rho = random_density::<f64>(d, 1 + (seed as usize) % d, seed).unwrap();
        write_operator_file(&path, &rho, None).unwrap();
        let back = parse_state_file::<f64>(&path).unwrap();
        prop_assert!(matches!(back, StateFile::Single(_)));
        prop_assert!(back.density().max_abs_diff(&rho) <= 1e-12);
    }

    #[test]
    fn positive_operators_survive_write_then_parse(d in 1usize..=6, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sigma.json");
        let sigma = random_positive_with::<f64, _>(d, &mut seeded(seed, 0));
        write_operator_file(&path, &sigma, None).unwrap();
        let (back, dims) = parse_operator_file::<f64>(&path).unwrap();
        prop_assert!(dims.is_none());
        prop_assert!(back.max_abs_diff(&sigma) <= 1e-12);
    }
}

#[test]
fn bipartite_dims_are_preserved() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ab.json");
    let rho = BipartiteState::new(random_density::<f64>(6, 3, 9).unwrap(), (2, 3)).unwrap();
    write_operator_file(&path, rho.state(), Some((2, 3))).unwrap();
    match parse_state_file::<f64>(&path).unwrap() {
        StateFile::Bipartite(b) => assert_eq!(b.dims(), (2, 3)),
        StateFile::Single(_) => panic!("dims were dropped"),
    }
}

#[test]
fn oversized_trace_is_rejected_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"dim":2,"entries":[[[0.75,0],[0,0]],[[0,0],[0.75,0]]]}"#).unwrap();
    let err = parse_state_file::<f64>(&path).unwrap_err();
    assert!(err.to_string().contains("bad.json"), "{err}");
    assert!(err.to_string().contains("1.5"), "{err}");
    match err {
        Error::File { source, .. } => assert!(matches!(*source, Error::InvalidTrace { .. })),
        other => panic!("unexpected error {other:?}"),
    }
}
