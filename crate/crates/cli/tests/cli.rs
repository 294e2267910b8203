use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowcut"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn validate_reports_shape() {
    let v = json_of(&["validate", &corpus("wheel6.json")]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["n"], 7);
    assert_eq!(v["outerplanar"], false);
}

#[test]
fn flow_exact_and_float_agree() {
    let exact = json_of(&["flow", &corpus("wheel6.json"), "--exact"]);
    let float = json_of(&["flow", &corpus("wheel6.json"), "--float"]);
    assert_eq!(exact["epsilon"], "4/3");
    assert_eq!(exact["certified"], true);
    assert!((float["epsilon_f64"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-9);
}

#[test]
fn exact_and_float_conflict() {
    let out = run(&["flow", &corpus("wheel6.json"), "--exact", "--float"]);
    assert!(!out.status.success());
}

#[test]
fn cut_and_dual_on_the_gap_witness() {
    let cut = json_of(&["cut", &corpus("gap_witness.json")]);
    assert_eq!(cut["kind"], "vertex");
    assert_eq!(cut["sparsity"], "1");
    let dual = json_of(&["dual", &corpus("gap_witness.json")]);
    assert_eq!(dual["epsilon"], "5/7");
    assert_eq!(dual["objective"], "5/7");
}

#[test]
fn gap_report_is_reproducible() {
    let args = [
        "gap",
        &corpus("wheel6.json"),
        "--samples",
        "4",
        "--seed",
        "3",
    ];
    let mut a = json_of(&args);
    let mut b = json_of(&args);
    a["runtime_ms"] = Value::Null;
    b["runtime_ms"] = Value::Null;
    assert_eq!(a, b);
    assert_eq!(a["schema"], "flowcut.report/1");
    assert_eq!(a["mcf"], "4/3");
    assert_eq!(a["tallies"]["composition_star"], 4);
}

#[test]
fn structural_subcommands_succeed() {
    let op = corpus("outerplanar_random1.json");
    let e = json_of(&["embed", &op, "--seed", "2"]);
    assert_eq!(e["tree_map"]["map"].as_array().unwrap().len(), 10);
    let t = json_of(&["thin", &op, "--seed", "2"]);
    assert!(t["thinness"].as_u64().unwrap() <= 4);
    let r = json_of(&["retract", &corpus("grid3x4_multi.json"), "--seed", "1"]);
    assert_eq!(r["map"].as_array().unwrap().len(), 12);
    let p = json_of(&["partition", &corpus("grid3x4_multi.json"), "--tau", "3"]);
    let covered: usize = p["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b.as_array().unwrap().len())
        .sum();
    assert_eq!(covered, 12);
    let round = json_of(&["round", &op, "--samples", "3"]);
    assert_eq!(round["ratio"], "1");
    let d = json_of(&["distortion", &op, "--samples", "50"]);
    assert!(d["min_mean_ratio"].as_f64().unwrap() >= 1.0 / 960.0);
}

#[test]
fn search_gap_writes_an_instance() {
    let out = std::env::temp_dir().join(format!("flowcut-gap-{}.json", std::process::id()));
    let status = run(&["search-gap", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    std::fs::remove_file(&out).ok();
    assert_eq!(v["ratio"], "7/5");
    assert_eq!(v["mcf"], "5/7");
}

#[test]
fn failures_exit_nonzero() {
    // embedding needs an outerplanar graph
    let out = run(&["embed", &corpus("wheel6.json")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not outerplanar"));
    let missing = run(&["flow", "/nonexistent.json"]);
    assert!(!missing.status.success());
    let budget = run(&["search-gap", "--budget", "3", "--target", "3"]);
    assert!(!budget.status.success());
}

#[test]
fn invalid_face_is_rejected() {
    let path = std::env::temp_dir().join(format!("flowcut-bad-{}.json", std::process::id()));
    std::fs::write(
        &path,
        r#"{"n": 4, "edges": [[0,1,1],[1,2,1],[2,3,1]], "face": [0,2], "demands": [[0,2,1]]}"#,
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert!(!out.status.success());
}
