use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use maxmin::instance::AllocationDoc;
use maxmin::Value;
use tempfile::TempDir;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/ex1.json")
}

fn maxmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxmin"))
        .args(args)
        .env_remove("MAXMIN_ASSERT")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn allocation(out: &Output) -> AllocationDoc {
    serde_json::from_slice(&out.stdout).expect("allocation JSON on stdout")
}

#[test]
fn solve_approx_on_ex1() {
    let fx = fixture();
    let out = maxmin(&["solve", "--solver", "approx", "--delta", "1", "--assert", "full", path_str(&fx)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(allocation(&out).min_value >= Value::ratio(3, 50));
}

#[test]
fn solve_afs_on_ex1() {
    let fx = fixture();
    let out = maxmin(&["solve", "--solver", "afs", path_str(&fx)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(allocation(&out).min_value >= Value::ratio(26, 99) * Value::ratio(3, 10));
}

#[test]
fn missing_file_is_usage_error() {
    let out = maxmin(&["solve", "no-such-file.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-file.json"));
}

#[test]
fn conflicting_parameters_are_rejected() {
    let fx = fixture();
    let out = maxmin(&["solve", "--solver", "afs", "--delta", "1", path_str(&fx)]);
    assert_eq!(out.status.code(), Some(1));
    let out = maxmin(&["solve", "--lambda", "1/3", path_str(&fx)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn env_overrides_assert_level() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let stats = dir.path().join("stats.json");
    let out = Command::new(env!("CARGO_BIN_EXE_maxmin"))
        .args(["solve", "--stats", path_str(&stats), path_str(&fx)])
        .env("MAXMIN_ASSERT", "full")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert!(report["stats"]["invariant_checks"].as_u64().unwrap() > 0);
}

#[test]
fn infeasible_target_gives_verifiable_certificate() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("cert.json");
    let out = maxmin(&["solve", "--target", "2", "--certificate", path_str(&cert), path_str(&fx)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = maxmin(&["verify", path_str(&fx), "--certificate", path_str(&cert)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn verify_allocations() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"bundles":[[0],[1,2,3]],"min_value":"3/10"}"#).unwrap();
    let out = maxmin(&["verify", path_str(&fx), "--allocation", path_str(&good), "--min-value", "3/10"]);
    assert_eq!(out.status.code(), Some(0));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"bundles":[[0],[0,1]],"min_value":"1/10"}"#).unwrap();
    let out = maxmin(&["verify", path_str(&fx), "--allocation", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("resource 0"));
}

#[test]
fn solve_output_file_verifies() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let alloc = dir.path().join("alloc.json");
    let out = maxmin(&["solve", "--out", path_str(&alloc), path_str(&fx)]);
    assert_eq!(out.status.code(), Some(0));
    let out = maxmin(&["verify", path_str(&fx), "--allocation", path_str(&alloc)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn generate_is_deterministic() {
    let args = ["generate", "--kind", "thin-heavy", "--players", "3", "--resources", "7", "--seed", "9"];
    let a = maxmin(&args);
    let b = maxmin(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let inst = maxmin::load_instance(&a.stdout).unwrap();
    assert_eq!((inst.n_players(), inst.n_resources()), (3, 7));
    assert_eq!(maxmin(&["generate", "--kind", "spiky", "--players", "2", "--resources", "2"]).status.code(), Some(2));
}

fn bench(solver: &str) -> serde_json::Value {
    let out = maxmin(&[
        "bench", "--solver", solver, "--count", "100", "--players", "4", "--resources", "9", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn max_ratio(report: &serde_json::Value) -> Value {
    report["max_ratio"].to_string().trim_matches('"').parse().unwrap()
}

#[test]
fn bench_ratios_within_guarantees() {
    let approx = bench("approx");
    assert_eq!(approx["instances"], 100);
    assert!(max_ratio(&approx) <= Value::from_integer(5));
    let afs = bench("afs");
    assert!(max_ratio(&afs) <= Value::ratio(99, 26));
}

#[test]
fn bench_is_reproducible() {
    let args = ["bench", "--count", "12", "--players", "3", "--resources", "8", "--seed", "5", "--format", "csv"];
    let a = maxmin(&args);
    let b = maxmin(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.starts_with("id,solver,"));
}

#[test]
fn oracle_limits_are_enforced() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("cert.json");
    maxmin(&["solve", "--target", "2", "--certificate", path_str(&cert), path_str(&fx)]);
    let out = maxmin(&["verify", path_str(&fx), "--certificate", path_str(&cert), "--oracle-max-desired", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("limit"));
}
