use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ctlab(args: &[&str], config: &str, dir: &Path) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ctlab"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .env("CTLAB_THREADS", "1")
        .output()
        .unwrap()
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn close(v: &Value, target: f64) -> bool {
    (v.as_f64().unwrap() - target).abs() < 1e-9
}

#[test]
fn gen_barbell() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctlab(&["gen"], r#"{"family": {"family": "barbell", "size": 4, "pendants": 2}}"#, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let wgr = fs::read_to_string(dir.path().join("out/graph.wgr")).unwrap();
    assert!(wgr.starts_with("6 "));
    assert_eq!(report(dir.path(), "report.json")["vertex_count"], 6);
}

#[test]
fn analyze_triangle_with_all_toggles() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "command": "analyze",
        "family": {"family": "complete", "size": 3},
        "toggles": {"resistance": true, "packing": true, "covering": true, "chaining": true,
                    "cover-mc": true, "cover-exact": true, "gff": true},
        "seed": 3
    }"#;
    let out = ctlab(&["analyze"], config, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "report.json");
    let a = &r["analysis"];
    assert!(close(&a["cover"]["t_cov"], 3.0));
    assert!(close(&a["hitting"]["t_hit"], 2.0));
    assert!(close(&a["resistance"]["diameter"], 2.0 / 3.0));
    assert!(close(&a["resistance"]["min_positive"], 2.0 / 3.0));
    assert_eq!(r["units"]["/analysis/hitting/t_hit"], "steps");
    assert_eq!(r["units"]["/analysis/resistance/diameter"], "ohms");
    let csv = fs::read_to_string(dir.path().join("out/resistance.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for line in csv.lines().skip(1) {
        let r: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-9);
    }
}

#[test]
fn analyze_is_reproducible() {
    let config = r#"{"family": {"family": "cycle", "size": 20}, "seed": 9, "budgets": {"replicas": 50}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(ctlab(&["analyze"], config, a.path()).status.success());
    assert!(ctlab(&["analyze"], config, b.path()).status.success());
    assert_eq!(
        fs::read(a.path().join("out/report.json")).unwrap(),
        fs::read(b.path().join("out/report.json")).unwrap()
    );
}

#[test]
fn missing_seed_with_monte_carlo_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctlab(&["analyze"], r#"{"family": {"family": "cycle", "size": 5}}"#, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ctlab(&["gen"], "{not json", dir.path()).status.code(), Some(2));
    assert_eq!(ctlab(&["gen"], r#"{"family": {"family": "cycle", "size": 5}, "bogus": 1}"#, dir.path()).status.code(), Some(2));
    assert_eq!(ctlab(&["gen"], r#"{"command": "analyze", "family": {"family": "cycle", "size": 5}}"#, dir.path()).status.code(), Some(2));
    // random family without any seed
    let er = r#"{"family": {"family": "er", "regime": {"regime": "critical"}, "size": 50}}"#;
    assert_eq!(ctlab(&["gen"], er, dir.path()).status.code(), Some(2));
    let missing = r#"{"graph": "nowhere.wgr", "toggles": {"cover_mc": false}}"#;
    assert_eq!(ctlab(&["analyze"], missing, dir.path()).status.code(), Some(2));
}

#[test]
fn step_cap_exhaustion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"family": {"family": "path", "size": 30}, "seed": 1, "budgets": {"step_cap": 5}}"#;
    let out = ctlab(&["analyze"], config, dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "budget");
}

#[test]
fn analyze_reads_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p3.wgr"), "3 2\n0 1 1\n1 2 1\n").unwrap();
    let config = r#"{"graph": "p3.wgr", "toggles": {"cover_mc": false}}"#;
    let out = ctlab(&["analyze"], config, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "report.json");
    assert!(close(&r["analysis"]["cover"]["t_cov"], 5.0));
    assert!(close(&r["analysis"]["hitting"]["t_hit"], 4.0));
}

#[test]
fn classify_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "family": {"family": "cycle"},
        "seed": 4,
        "budgets": {"replicas": 2},
        "classify": {"sizes": [6, 8, 10, 12], "samples": 10,
                     "fits": [{"model": "power_in_n", "observable": "t_cov"}]}
    }"#;
    let out = ctlab(&["classify"], config, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "report.json");
    assert_eq!(r["type_report"]["verdict"], "type2-consistent");
    let csv = fs::read_to_string(dir.path().join("out/stats.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("t_cov_steps"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn classify_with_one_size_is_insufficient() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"family": {"family": "cycle"}, "seed": 4, "budgets": {"replicas": 2},
                     "classify": {"sizes": [6], "samples": 10}}"#;
    assert_eq!(ctlab(&["classify"], config, dir.path()).status.code(), Some(2));
}

#[test]
fn reduced_catalog_is_annotated_and_deterministic() {
    let config = r#"{"seed": 5, "catalog": {"criteria": [3, 6], "mc_replicas": 2000,
                     "gff_replicas": 2000, "catalog_gff_replicas": 500}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = ctlab(&["catalog"], config, a.path());
    assert!(out.stdout.starts_with(b"criterion 3"), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    assert_eq!(ctlab(&["catalog"], config, b.path()).status.code(), out.status.code());
    let ra = fs::read(a.path().join("out/catalog.json")).unwrap();
    assert_eq!(ra, fs::read(b.path().join("out/catalog.json")).unwrap());
    let report: Value = serde_json::from_slice(&ra).unwrap();
    let notes = report["rows"][0]["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().starts_with("reduced budget")));
    assert_eq!(report["config"]["master_seed"], 5);
}
