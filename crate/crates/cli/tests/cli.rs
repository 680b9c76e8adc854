use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const EDGE: &str = r#"{"q": 2, "vertices": ["u", "v"], "edges": [{"u": "u", "v": "v", "J": 1.0986122886681098}]}"#;

fn potts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_potts-gks")).args(args).env_remove("POTTS_GKS_CAP").output().expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("bad JSON line {l:?}: {e}")))
        .collect()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary(out: &Output) -> Value {
    let all = lines(out);
    let last = all.last().expect("at least a summary").clone();
    assert_eq!(last["kind"], "summary");
    assert!(all[..all.len() - 1].iter().all(|v| v["kind"] != "summary"));
    last
}

#[test]
fn fclass_family_b_passes() {
    let out = potts(&["fclass", "--kind", "B", "--q", "4", "--M", "48"]);
    assert_eq!(out.status.code(), Some(0));
    let records = lines(&out);
    assert_eq!(records[0]["in_fq"], true);
    assert_eq!(summary(&out)["status"], "pass");
}

#[test]
fn fclass_non_member_exits_one() {
    let out = potts(&["fclass", "--f", "table:1,-2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(summary(&out)["violations"], 1);
}

#[test]
fn verify_gks_on_single_edge() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "edge.json", EDGE);
    let out = potts(&["verify", "gks", "--model", &model, "--f", "familyA", "--R", "u", "--S", "v"]);
    assert_eq!(out.status.code(), Some(0));
    let report = &lines(&out)[0];
    assert_eq!(report["claim"], "product_correlation");
    assert!((report["margin"].as_f64().unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn missing_model_is_an_input_error() {
    let out = potts(&["exact", "--model", "definitely-missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(summary(&out)["status"], "input_error");
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_inputs_exit_two_without_panicking() {
    let dir = TempDir::new().unwrap();
    let garbage = write(&dir, "bad.json", "{\"q\": 2, \"vertices\": [\"u\"");
    let negative =
        write(&dir, "neg.json", r#"{"q": 2, "vertices": ["u", "v"], "edges": [{"u": "u", "v": "v", "J": -1}]}"#);
    let edge = write(&dir, "edge.json", EDGE);
    for args in [
        vec!["exact", "--model", garbage.as_str()],
        vec!["exact", "--model", negative.as_str()],
        vec!["exact", "--model", edge.as_str(), "--f", "A", "--R", "w"],
        vec!["verify", "gks", "--model", edge.as_str(), "--f", "A"],
        vec!["verify", "real", "--model", edge.as_str(), "--f", "table:1,-2"],
        vec!["mc", "--model", edge.as_str(), "--f", "A", "--sweeps", "10", "--burn-in", "20", "--seed", "1"],
        vec!["fuzz", "--seed", "1", "--q-min", "1"],
        vec!["fclass", "--kind", "C", "--q", "3"],
    ] {
        let out = potts(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(summary(&out)["exit_code"], 2, "{args:?}");
        assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"), "{args:?}");
    }
}

#[test]
fn randomized_commands_require_a_seed() {
    let dir = TempDir::new().unwrap();
    let edge = write(&dir, "edge.json", EDGE);
    assert_eq!(potts(&["mc", "--model", &edge, "--f", "A", "--sweeps", "100"]).status.code(), Some(2));
    assert_eq!(potts(&["fuzz", "--trials", "3"]).status.code(), Some(2));
}

#[test]
fn dumped_model_reparses_identically() {
    let dir = TempDir::new().unwrap();
    let src = r#"{"q": 3, "vertices": ["a", "b", "c"],
        "edges": [{"u": "a", "v": "b", "J": 0.25}, {"u": "c", "v": "b", "J": 1.5}],
        "fields": {"c": 0.75}}"#;
    let path = write(&dir, "m.json", src);
    let out = potts(&["exact", "--model", &path, "--dump-model"]);
    assert_eq!(out.status.code(), Some(0));
    let dumped = String::from_utf8(out.stdout).unwrap().lines().next().unwrap().to_string();
    let original = potts_gks::io::load_model(Path::new(&path)).unwrap();
    assert_eq!(potts_gks::io::parse_model(&dumped).unwrap(), original);

    // and the dump itself round-trips through the binary
    let again = write(&dir, "again.json", &dumped);
    let out = potts(&["exact", "--model", &again, "--dump-model"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().next().unwrap(), dumped);
}

#[test]
fn exact_means_on_single_edge() {
    let dir = TempDir::new().unwrap();
    let edge = write(&dir, "edge.json", EDGE);
    let out = potts(&["exact", "--model", &edge, "--f", "A", "--R", "u", "--S", "v"]);
    let records = lines(&out);
    assert!((records[0]["z"].as_f64().unwrap() - 8.0).abs() < 1e-12);
    let joint = records.iter().find(|r| r["observable"] == "RS").unwrap();
    assert!((joint["mean"][0].as_f64().unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn rc_checks_pass_and_list_sums_to_one() {
    let dir = TempDir::new().unwrap();
    let model = write(
        &dir,
        "tri.json",
        r#"{"q": 3, "vertices": ["x", "y", "z"],
            "edges": [{"u": "x", "v": "y", "J": 0.7}, {"u": "y", "v": "z", "J": 0.2}, {"u": "x", "v": "z", "J": 1.1}],
            "fields": {"x": 0.3, "z": 1.0}}"#,
    );
    let out = potts(&["rc", "--model", &model, "--f", "B", "--R", "x,z", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let records = lines(&out);
    let total: f64 = records.iter().filter(|r| r["kind"] == "bond_config").map(|r| r["phi"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(summary(&out)["checks"], 2);
}

#[test]
fn verify_all_skips_field_coordinates_for_rotated_functions() {
    let dir = TempDir::new().unwrap();
    let edge = write(&dir, "edge.json", EDGE);
    // family A for q = 2 rotated by one state
    let out = potts(&["verify", "all", "--model", &edge, "--f", "table:-0.5,0.5", "--R", "u", "--S", "u,v"]);
    assert_eq!(out.status.code(), Some(0));
    let records = lines(&out);
    assert_eq!(records.iter().filter(|r| r["kind"] == "skipped").count(), 2);
}

#[test]
fn disjoint_support_for_indicator_pair() {
    let dir = TempDir::new().unwrap();
    let edge = write(&dir, "edge.json", EDGE);
    let out =
        potts(&["verify", "disjoint", "--model", &edge, "--f", "delta:0", "--f1", "delta:1", "--R", "u", "--S", "v"]);
    assert_eq!(out.status.code(), Some(0));
    let report = &lines(&out)[0];
    assert!((report["lhs"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((report["rhs"].as_f64().unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn mc_is_reproducible_and_agrees() {
    let dir = TempDir::new().unwrap();
    let edge = write(&dir, "edge.json", EDGE);
    let args = ["mc", "--model", &edge, "--f", "A", "--sweeps", "20000", "--seed", "7", "--exact", "--rb"];
    let a = potts(&args);
    let b = potts(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn fuzz_small_run_is_clean() {
    let out = potts(&["fuzz", "--seed", "5", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&out);
    assert_eq!(s["violations"], 0);
    assert_eq!(s["trials"], 100);
}

#[test]
fn csv_prints_only_the_summary() {
    let out = potts(&["fclass", "--kind", "A", "--q", "5", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("kind,command,status,exit_code"));
    assert!(rows[1].starts_with("summary,fclass,pass,0"));
}

#[test]
fn cap_flag_and_env_limit_enumeration() {
    let dir = TempDir::new().unwrap();
    let edge = write(&dir, "edge.json", EDGE);
    assert_eq!(potts(&["exact", "--model", &edge, "--cap", "3"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_potts-gks"))
        .args(["exact", "--model", &edge])
        .env("POTTS_GKS_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_potts-gks"))
        .args(["exact", "--model", &edge, "--cap", "4"])
        .env("POTTS_GKS_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
