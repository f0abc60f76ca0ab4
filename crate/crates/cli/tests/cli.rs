use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const THREE_GROUNDED: &str = r#"{"factors": [
  [{"deg": 1, "num": 1}],
  [{"deg": 3, "num": 1}, {"deg": 0, "num": -1}],
  [{"deg": 3, "num": 1}, {"deg": 2, "num": 6}, {"deg": 1, "num": 12}, {"deg": 0, "num": 7}]
]}"#;

const DEGREE_SEVEN: &str = r#"{"factors": [[
  {"deg": 7, "num": 128}, {"deg": 6, "num": 24}, {"deg": 5, "num": 257},
  {"deg": 4, "num": 176}, {"deg": 3, "num": 154}, {"deg": 2, "num": 25}, {"deg": 1, "num": 1}
]]}"#;

fn hyperred(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hyperred"));
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    let mut pipe = child.stdin.take().unwrap();
    if let Some(s) = stdin {
        pipe.write_all(s.as_bytes()).unwrap();
    }
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn run_file(dir: &Path, input: &str, extra: &[&str]) -> Output {
    let inp = dir.join("curve.json");
    fs::write(&inp, input).unwrap();
    let out = dir.join("out");
    let mut args = vec![inp.to_str().unwrap(), "-o", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    hyperred(&args, None)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn three_grounded_nodes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_file(dir.path(), THREE_GROUNDED, &["--check-invariants", "strict"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r["schema"], "hyperred/1");
    assert_eq!(r["genus"], 3);
    assert_eq!(r["totals"]["toric_rank"], 0);
    let dps = r["downstairs"]["double_points"].as_array().unwrap();
    assert_eq!(dps.len(), 3);
    assert!(dps.iter().all(|d| d["grounded"] == true && d["thickness"] == "1/1"));
    let stable = r["stable"]["double_points"].as_array().unwrap();
    assert_eq!(stable.len(), 9);
    assert!(stable.iter().all(|d| d["thickness"] == "1/4" && d["annotation"] == "paper-exact"));
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn truncation_gives_the_same_graph() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_file(a.path(), DEGREE_SEVEN, &[]).status.success());
    assert!(run_file(b.path(), DEGREE_SEVEN, &["--truncate"]).status.success());
    let (ra, rb) = (report(a.path()), report(b.path()));
    for key in ["downstairs", "intermediate", "upstairs", "stable", "local_genus", "totals"] {
        assert_eq!(ra[key], rb[key], "{key}");
    }
    assert_eq!(
        fs::read(a.path().join("out/graph.dot")).unwrap(),
        fs::read(b.path().join("out/graph.dot")).unwrap()
    );
    let certs: Vec<&Value> = rb["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("truncation certificate"))
        .collect();
    assert!(!certs.is_empty());
    assert!(certs.iter().all(|c| c["passed"] == true));
}

#[test]
fn malformed_input_exits_two_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_file(dir.path(), r#"{"factors": [[{"deg": 1,"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
    let o = run_file(dir.path(), r#"{"factors": [[{"deg": 1, "num": "one"}]]}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn reports_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_file(a.path(), THREE_GROUNDED, &[]).status.success());
    assert!(run_file(b.path(), THREE_GROUNDED, &[]).status.success());
    for f in ["out/report.json", "out/graph.dot"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn dot_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_file(dir.path(), DEGREE_SEVEN, &["--emit", "dot"]).status.success());
    assert!(!dir.path().join("out/report.json").exists());
    let text = fs::read_to_string(dir.path().join("out/graph.dot")).unwrap();
    graphviz_rust::parse(&text).unwrap();
    for c in ["cluster_downstairs", "cluster_intermediate", "cluster_upstairs"] {
        assert!(text.contains(c));
    }
}

#[test]
fn policy_hides_weaker_thicknesses() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_file(dir.path(), DEGREE_SEVEN, &["--thickness-annotations", "paper-exact-only"]);
    assert!(o.status.success());
    let r = report(dir.path());
    let edges = r["upstairs"]["double_points"].as_array().unwrap();
    for e in edges {
        if e["annotation"] != "paper-exact" {
            assert_eq!(e["thickness"], "unknown");
        } else {
            assert_ne!(e["thickness"], "unknown");
        }
    }
    assert!(edges.iter().any(|e| e["thickness"] == "unknown"));
}

#[test]
fn reads_standard_input_and_file_options() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let input = r#"{"factors": [[{"deg": 5, "num": 1}, {"deg": 0, "num": 1}]],
                    "options": {"precision": "10", "thickness_annotation": "with-heuristic"}}"#;
    let o = hyperred(&["-", "-o", out.to_str().unwrap()], Some(input));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r["options"]["precision"], "10/1");
    assert_eq!(r["options"]["thickness_annotation"], "with-heuristic");
    assert_eq!(r["genus"], 2);
}

#[test]
fn pipeline_errors_are_actionable() {
    let dir = tempfile::tempdir().unwrap();
    let input = r#"{"factors": [[{"deg": 5, "num": 1, "pow2": "1/3"}, {"deg": 0, "num": 1}]]}"#;
    let o = run_file(dir.path(), input, &["--max-ram-index", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("--max-ram-index"), "{err}");
    assert!(!dir.path().join("out").exists());
}
