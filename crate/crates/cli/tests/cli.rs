use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use surgeflow_cli::{parse_instance, parse_instance_str, serialize_instance, Instance};
use surgeflow_core::{Rational, Scalar};

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn surgeflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surgeflow")).args(args).env_remove("SURGEFLOW_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

#[test]
fn bundled_instance_parses() {
    let Instance::Continuous(c) = parse_instance(&instance("worked_example.json")).unwrap() else { panic!() };
    assert_eq!(c.metric.k(), 6);
    assert_eq!(*c.metric.dist(0, 5), q(3, 1));
    assert_eq!(c.supply.as_slice(), &[q(1, 3), q(1, 3), q(1, 3), q(0, 1), q(0, 1), q(0, 1)]);
    assert_eq!(c.demand.as_slice(), &[q(0, 1), q(0, 1), q(1, 8), q(3, 8), q(3, 8), q(1, 8)]);
}

#[test]
fn round_trip_is_exact() {
    for name in ["worked_example.json", "worked_example_tampered.json", "discrete_two_bidders.json"] {
        let inst = parse_instance(&instance(name)).unwrap();
        let text = serialize_instance(&inst);
        assert_eq!(parse_instance_str(&text).unwrap(), inst, "{name}");
        assert_eq!(serialize_instance(&parse_instance_str(&text).unwrap()), text);
    }
}

#[test]
fn continuous_surge_with_unit_convention() {
    let input = instance("worked_example.json");
    let out = surgeflow(&["surge", "continuous", "--input", input.to_str().unwrap(), "--zero-demand-price", "one"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["surge"]["price"], serde_json::json!(["1", "1", "1", "4", "3", "2"]));
    assert_eq!(doc["item_prices"], serde_json::json!(["0", "0", "1", "3", "1", "2"]));
    assert_eq!(doc["flow"]["cost"], "1");
    assert_eq!(doc["equilibrium"]["ok"], true);
}

#[test]
fn tampered_surge_fails_verification() {
    let input = instance("worked_example_tampered.json");
    let out = surgeflow(&["verify", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    let violations = doc["equilibrium"]["violations"].as_array().unwrap();
    assert!(!violations.is_empty());
    assert!(violations.iter().all(|v| v["flowed_to"] == 3), "{violations:?}");
}

#[test]
fn untampered_file_verifies() {
    let input = instance("worked_example.json");
    assert_eq!(surgeflow(&["verify", "--input", input.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn discrete_surge() {
    let input = instance("discrete_two_bidders.json");
    let out = surgeflow(&["surge", "discrete", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["assignment"][0]["passenger"], "alice");
    assert_eq!(doc["taxi_prices"], serde_json::json!(["1"]));
    assert_eq!(doc["surge"], serde_json::json!(["1", "2"]));
    assert_eq!(doc["welfare"], "2");
    assert_eq!(doc["reports"]["truthful"]["ok"], true);
}

#[test]
fn drift_match_row() {
    let out = surgeflow(&[
        "simulate",
        "--generator",
        "drift:delta=0.1,T=1000",
        "--algorithm",
        "match",
        "--trials",
        "1",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap(), vec!["trial", "T", "k", "rho", "delta", "sw_alg", "sw_opt", "ratio"]);
    let recs: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert_eq!(recs.len(), 1);
    assert!(recs[0][7].parse::<f64>().unwrap() >= 0.9);
}

#[test]
fn simulation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let plot = dir.path().join(format!("{tag}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_surgeflow"))
            .args([
                "simulate",
                "--generator",
                "geometric:epsilon=1/4,k=5,T=60",
                "--algorithm",
                "comp:p=0.4",
                "--trials",
                "4",
            ])
            .args(["--out", csv.to_str().unwrap(), "--emit-plot-data", plot.to_str().unwrap()])
            .env("SURGEFLOW_SEED", "11")
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(csv).unwrap(), std::fs::read(plot).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let plot: Value = serde_json::from_slice(&a.1).unwrap();
    assert_eq!(plot["trials"].as_array().unwrap().len(), 4);
    assert_eq!(plot["trials"][0]["served_alg"].as_array().unwrap().len(), 60);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": "1", "metric": {"k": 2, "edges": [[0, 1, "1"]]}, "supply": ["1", "0"], "demand": ["0.5", "0.49"]}"#).unwrap();
    let out = surgeflow(&["verify", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("demand"));
    assert_eq!(surgeflow(&["verify", "--input", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(
        surgeflow(&["simulate", "--generator", "drift:delta=0.1,T=10", "--algorithm", "match"]).status.code(),
        Some(2)
    );
    assert_eq!(
        surgeflow(&["simulate", "--generator", "drift:delta=0.9,T=10", "--algorithm", "match", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(surgeflow(&["bogus"]).status.code(), Some(2));
}
