use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiv")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const RHO_BENCH: &str = r#"{"dim":2,"entries":[[[0.9,0],[0,0]],[[0,0],[0.1,0]]]}"#;
const SIGMA_BENCH: &str = r#"{"dim":2,"entries":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;

#[test]
fn gen_is_reproducible_per_seed() {
    let a = qdiv(&["--seed", "5", "gen", "state", "--dim", "3"]);
    let b = qdiv(&["--seed", "5", "gen", "state", "--dim", "3"]);
    let c = qdiv(&["--seed", "6", "gen", "state", "--dim", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generated_files_feed_compute() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    let sigma = dir.path().join("sigma.json");
    for (seed, path) in [("1", &rho), ("2", &sigma)] {
        let out = qdiv(&[
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
            "gen",
            "state",
            "--dim",
            "3",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let out = qdiv(&[
        "compute",
        "--rho",
        rho.to_str().unwrap(),
        "--sigma",
        sigma.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["sandwich_ok"], Value::Bool(true));
    let bits = |k: &str| report[k]["bits"].as_f64().unwrap();
    assert!(bits("d_min") <= bits("rel_entropy") && bits("rel_entropy") <= bits("d_max"));
}

#[test]
fn smooth_benchmark_values() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write(dir.path(), "rho.json", RHO_BENCH);
    let sigma = write(dir.path(), "sigma.json", SIGMA_BENCH);
    let dmax = json(&qdiv(&[
        "smooth",
        "--rho",
        &rho,
        "--sigma",
        &sigma,
        "--quantity",
        "dmax",
        "--eps",
        "0.2",
    ]));
    assert!((dmax["value_bits"].as_f64().unwrap() - 1.4f64.log2()).abs() < 1e-3);
    let dmin = json(&qdiv(&[
        "smooth",
        "--rho",
        &rho,
        "--sigma",
        &sigma,
        "--quantity",
        "dmin",
        "--eps",
        "0.25",
    ]));
    assert_eq!(dmin["value"]["bits"].as_f64(), Some(1.0));
}

#[test]
fn converge_writes_rate_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write(
        dir.path(),
        "rho.json",
        r#"{"dim":2,"entries":[[[0.75,0],[0,0]],[[0,0],[0.25,0]]]}"#,
    );
    let sigma = write(dir.path(), "sigma.json", SIGMA_BENCH);
    let out = qdiv(&["converge", "--rho", &rho, "--sigma", &sigma, "--nmax", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,eps,dmax_over_n,dmin_over_n,rel_entropy");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1,5.00000000e-2,"));
    assert!(lines[4].ends_with(",1.88721876e-1"));
}

#[test]
fn oversized_trace_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"dim":2,"entries":[[[0.75,0],[0,0]],[[0,0],[0.75,0]]]}"#,
    );
    let sigma = write(dir.path(), "sigma.json", SIGMA_BENCH);
    let out = qdiv(&["compute", "--rho", &bad, "--sigma", &sigma]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1.5") && err.contains("bad.json"), "{err}");
}

#[test]
fn usage_errors_exit_with_validation_code() {
    assert_eq!(qdiv(&["compute"]).status.code(), Some(1));
    assert_eq!(
        qdiv(&["--tolerance", "1e-3", "gen", "state", "--dim", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(qdiv(&["suite", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(qdiv(&["--help"]).status.code(), Some(0));
}

#[test]
fn suite_reports_are_deterministic() {
    let args = ["--seed", "9", "suite", "--trials", "4", "--filter", "div_"];
    let a = qdiv(&args);
    let b = qdiv(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let one_thread = qdiv(&[
        "--seed",
        "9",
        "suite",
        "--trials",
        "4",
        "--filter",
        "div_",
        "--threads",
        "1",
    ]);
    assert_eq!(a.stdout, one_thread.stdout);
}

#[test]
fn single_trial_suite_names_every_check_once() {
    let out = qdiv(&["suite", "--trials", "1", "--format", "csv"]);
    let listed = stdout(&qdiv(&["suite", "--list"]));
    let names: Vec<String> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    let expected: Vec<String> = listed.lines().map(str::to_string).collect();
    assert_eq!(names, expected);
    assert!(names.len() >= 40);
}

#[test]
fn failing_check_exits_with_suite_code() {
    // the additive form of condition (v) does not hold for D_max
    let out = qdiv(&["suite", "--trials", "1", "--filter", "theorem1_v_sum"]);
    assert_eq!(out.status.code(), Some(3));
    let report = json(&out);
    assert_eq!(report["pass"], Value::Bool(false));
}

#[test]
fn tolerance_overrides_are_applied() {
    let out = qdiv(&[
        "--tolerance",
        "0.5",
        "suite",
        "--trials",
        "1",
        "--filter",
        "op_triangle",
        "--lemma-tolerance",
        "op_triangle_inequality=0.25",
    ]);
    let report = json(&out);
    assert_eq!(report["lemmas"][0]["tolerance"].as_f64(), Some(0.25));
}
