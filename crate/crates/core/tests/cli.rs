use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn torifano(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torifano")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = torifano(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

/// Report text with the timing field removed.
fn payload(path: &Path) -> String {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v.to_string()
}

fn strings(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::String(s) => out.push(s.clone()),
        Value::Array(a) => a.iter().for_each(|x| strings(x, out)),
        Value::Object(o) => o.values().for_each(|x| strings(x, out)),
        _ => {}
    }
}

#[test]
fn hexagon_verdict_is_payload_not_exit_code() {
    let r = report(&["ke-verdict", "--example", "hexagon-dP6-t:1/10"]);
    assert_eq!(r["result"]["verdict"]["verdict"], "NotExists");
    assert_eq!(r["result"]["verdict"]["destabilizer"], serde_json::json!(["-148/66303", "-148/66303"]));
    assert_eq!(r["result"]["destabilizer_df"]["destabilizing"], true);
    assert_eq!(r["tolerances"]["tol"], 1e-10);
}

#[test]
fn fourfold_barycenter_volume() {
    let r = report(&["barycenter", "--example", "pE-4fold-c:1/2"]);
    assert_eq!(r["result"]["polytopes"][0]["volume"], "25/144");
    assert_eq!(r["result"]["polytopes"][0]["barycenter"][3], "1/250");
    assert!(r["ingestion"][0].as_str().unwrap().contains("negated"));
}

#[test]
fn blowup_soliton_is_diagonal() {
    let r = report(&["soliton-solve", "--example", "blowup-p2-1pt"]);
    let v = r["result"]["solution"]["v"].as_array().unwrap();
    let (a, b) = (v[0].as_f64().unwrap(), v[1].as_f64().unwrap());
    assert!((a - b).abs() < 1e-10);
    assert!(r["result"]["solution"]["residual_norm"].as_f64().unwrap() < 1e-10);
}

#[test]
fn exit_codes() {
    assert_eq!(torifano(&["frobnicate", "--example", "p2"]).status.code(), Some(1));
    assert_eq!(torifano(&["validate"]).status.code(), Some(1));
    assert_eq!(torifano(&["validate", "--example", "p2", "--input", "x.json"]).status.code(), Some(1));
    assert_eq!(torifano(&["lift", "--example", "p2"]).status.code(), Some(1));
    assert_eq!(torifano(&["validate", "--example", "no-such-example"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "dimension": 1, "rays": [[1], [-1]], "max_cones": [[0], [1]], "decomposition": [["1", "1/0"]]}"#).unwrap();
    let out = torifano(&["validate", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("decomposition[0][1]"));
    assert_eq!(torifano(&["validate", "--input", "/nonexistent/problem.json"]).status.code(), Some(2));
    assert_eq!(torifano(&["ma-solve", "--example", "p2"]).status.code(), Some(2));
    assert_eq!(torifano(&["ma-solve", "--example", "p1-fubini", "--grid", "R=8,h=0.1"]).status.code(), Some(2));

    // an unreachable tolerance exhausts the Newton budget
    let out = torifano(&["soliton-solve", "--example", "blowup-p2-1pt", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"]["converged"], false);
}

#[test]
fn obstructed_ma_solve_exits_zero() {
    let r = report(&["ma-solve", "--example", "p1-pair:2", "--grid", "R=8,h=0.01"]);
    assert_eq!(r["result"]["outcome"], "obstructed");
    assert_eq!(r["result"]["heuristic"], true);
    assert!((r["result"]["closed_form_residual"].as_f64().unwrap() - 0.156518).abs() < 1e-6);
    assert_eq!(r["tolerances"]["grid"]["step"], 0.01);
}

#[test]
fn reports_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["ke-verdict", "soliton-solve", "df"] {
        let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("{cmd}{i}.json"))).collect();
        for p in &paths {
            let out = torifano(&[cmd, "--example", "blowup-p2-1pt", "--out", p.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0));
            assert!(out.stdout.is_empty());
        }
        assert_eq!(payload(&paths[0]), payload(&paths[1]), "{cmd}");
    }
}

#[test]
fn rationals_are_reduced_strings() {
    let r = report(&["df", "--example", "hexagon-dP6-t:1/10", "--v", "2/4,-3"]);
    assert_eq!(r["result"]["v"], serde_json::json!(["1/2", "-3"]));
    let mut all = Vec::new();
    strings(&r["result"], &mut all);
    for s in all {
        let q = torifano::rational::parse(&s).unwrap();
        assert_eq!(q.to_string(), s);
    }
}

#[test]
fn documents_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let doc = torifano::cli::builtin_example("hexagon-dP6-t:1/10").unwrap();
    let path = dir.path().join("hexagon.json");
    std::fs::write(&path, doc.to_json()).unwrap();
    let from_file = report(&["barycenter", "--input", path.to_str().unwrap()]);
    let from_name = report(&["barycenter", "--example", "hexagon-dP6-t:1/10"]);
    assert_eq!(from_file["result"], from_name["result"]);
}

#[test]
fn lift_and_validate_reports() {
    let r = report(&["lift", "--example", "blowup-p2-1pt", "--v", "1,0", "--cap", "3"]);
    assert_eq!(r["result"]["identity_holds"], true);
    assert_eq!(r["result"]["cap"], "3");
    let r = report(&["validate", "--example", "pE-4fold-c:1/5"]);
    assert_eq!(r["result"]["decomposition"]["valid"], false);
    assert_eq!(r["result"]["decomposition"]["rows"][0]["class"], "redundant");
}

#[test]
fn snapshots_are_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("snaps.jsonl");
    let r = report(&[
        "ma-solve",
        "--example",
        "p1-fubini",
        "--grid",
        "R=8,h=0.02",
        "--t-schedule",
        "0,0.5,1",
        "--snapshots",
        snaps.to_str().unwrap(),
    ]);
    assert_eq!(r["result"]["outcome"], "converged");
    let text = std::fs::read_to_string(&snaps).unwrap();
    let ts: Vec<f64> = text.lines().map(|l| serde_json::from_str::<Value>(l).unwrap()["t"].as_f64().unwrap()).collect();
    assert_eq!(ts, vec![0.0, 0.5, 1.0]);
}
