use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TRIANGLE: &str = r#"{"n": 3, "m": 3, "rows": [[0, 1], [1, 2], [0, 2]],
  "b": ["1", "1", "1"], "w": ["1", "1", "1"], "X": [1, 1, 1], "sense": "packing"}"#;
const PATH: &str = r#"{"n": 2, "m": 3, "rows": [[0], [0, 1], [1]],
  "b": ["1", "1", "1"], "w": ["2", "1"], "X": [1, 1], "sense": "packing"}"#;
const COVER: &str = r#"{"n": 2, "m": 1, "rows": [[0, 1]],
  "b": ["1"], "w": ["2", "3"], "X": [1, 1], "sense": "covering"}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_packcover"))
        .args(args)
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn minsum_alternates_on_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "t.json", TRIANGLE);
    let inst = inst.to_str().unwrap();
    assert_eq!(
        json(&["minsum", "--instance", inst, "--iterations", "1"])["x_hat"],
        serde_json::json!([0, 0, 0])
    );
    let trace = dir.path().join("trace.jsonl");
    let even = json(&[
        "minsum",
        "--instance",
        inst,
        "--iterations",
        "2",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(even["x_hat"], serde_json::json!([1, 1, 1]));
    assert_eq!(even["valid"], Value::Bool(false));
    let lines = fs::read_to_string(&trace).unwrap();
    // 2 iterations, 2 directions, 6 edges, 2 values
    assert_eq!(lines.lines().count(), 48);
    let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["direction"], "var_to_con");
}

#[test]
fn lp_and_tree_dp() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "m.json", PATH);
    let path = path.to_str().unwrap();
    let lp = json(&["solve-lp", "--instance", path]);
    assert_eq!(
        (lp["opt_value"].as_str(), lp["c"].as_str()),
        (Some("2"), Some("1/2"))
    );
    let tri = write(dir.path(), "t.json", TRIANGLE);
    let tree = json(&[
        "tree-dp",
        "--instance",
        tri.to_str().unwrap(),
        "--root",
        "0",
        "--iterations",
        "1",
    ]);
    assert_eq!(tree["optima"], serde_json::json!(["2", "1"]));
    assert_eq!(tree["root_set"], serde_json::json!([0]));
}

#[test]
fn covering_goes_through_the_complement() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write(dir.path(), "c.json", COVER);
    let cover = cover.to_str().unwrap();
    let lp = json(&["solve-lp", "--instance", cover]);
    assert_eq!(lp["witness"], serde_json::json!(["1", "0"]));
    let run = json(&["minsum", "--instance", cover, "--iterations", "3"]);
    assert_eq!(run["x_hat"], serde_json::json!([1, 0]));
    let tree = json(&[
        "tree-dp",
        "--instance",
        cover,
        "--root",
        "0",
        "--iterations",
        "3",
    ]);
    assert_eq!(tree["root_set"], serde_json::json!([1]));
}

#[test]
fn lifts_from_every_permutation_source() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "t.json", TRIANGLE);
    let tri = tri.to_str().unwrap();
    let lifted = json(&[
        "lift",
        "--instance",
        tri,
        "--fold",
        "2",
        "--perms",
        "all-swap",
    ]);
    assert_eq!(
        (lifted["n"].as_u64(), lifted["m"].as_u64()),
        (Some(6), Some(6))
    );
    let random = json(&[
        "lift",
        "--instance",
        tri,
        "--fold",
        "3",
        "--perms",
        "random:4",
    ]);
    assert_eq!(random["n"].as_u64(), Some(9));
    let perms = write(dir.path(), "p.txt", "0 1\n1 0\n0 1\n1 0\n0 1\n1 0\n");
    let explicit = json(&[
        "lift",
        "--instance",
        tri,
        "--fold",
        "2",
        "--perms",
        perms.to_str().unwrap(),
    ]);
    assert_eq!(explicit["m"].as_u64(), Some(6));
    let bad = write(dir.path(), "bad.txt", "0 0\n");
    let out = run(&[
        "lift",
        "--instance",
        tri,
        "--fold",
        "2",
        "--perms",
        bad.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("permutation"));

    let amplified = json(&["lift", "amplify", "--instance", tri, "--target", "12"]);
    assert_eq!(amplified["girth"].as_u64(), Some(12));
}

#[test]
fn oscillation_and_convergence_reports() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "t.json", TRIANGLE);
    let csv = dir.path().join("o.csv");
    let report = json(&[
        "oscillation",
        "--instance",
        tri.to_str().unwrap(),
        "--t-max",
        "4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(report["violations"].as_u64(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "instance_id,r,t,parity,delta_min,delta_max,x_min,x_max,x_hat,verdict"
    );
    assert_eq!(
        text.lines().nth(2).unwrap(),
        "t,0,2,even,1,1,1/2,1/2,1,pass"
    );

    let path = write(dir.path(), "m.json", PATH);
    let conv = json(&[
        "convergence",
        "--instance",
        path.to_str().unwrap(),
        "--slack",
        "1",
    ]);
    assert_eq!(
        (conv["status"].as_str(), conv["t_star"].as_u64()),
        (Some("converged"), Some(5))
    );
    let conv = json(&["convergence", "--instance", tri.to_str().unwrap()]);
    assert_eq!(conv["status"].as_str(), Some("precondition-violated"));
}

#[test]
fn sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "s.json",
        r#"{"family": "random", "seed_start": 0, "seed_end": 20, "t_max": 4}"#,
    );
    let a = run(&["sweep", "--config", config.to_str().unwrap()]);
    let b = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let empty = write(
        dir.path(),
        "e.json",
        r#"{"family": "random", "seed_start": 5, "seed_end": 5, "t_max": 4}"#,
    );
    let out = run(&["sweep", "--config", empty.to_str().unwrap()]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}

#[test]
fn generate_and_realize() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["generate", "--family", "triangle-mwis", "--seed", "1"]);
    assert!(out.status.success());
    let inst: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(inst["n"].as_u64(), Some(3));
    assert!(!run(&["generate", "--family", "nope"]).status.success());

    let tri = write(dir.path(), "t.json", TRIANGLE);
    let found = json(&[
        "realize",
        "--instance",
        tri.to_str().unwrap(),
        "--x",
        "1/2,1/2,1/2",
    ]);
    assert_eq!(
        (found["found"].as_bool(), found["fold"].as_u64()),
        (Some(true), Some(2))
    );
    let infeasible = run(&[
        "realize",
        "--instance",
        tri.to_str().unwrap(),
        "--x",
        "1,1,0",
    ]);
    assert!(!infeasible.status.success());
}
