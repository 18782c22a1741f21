use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sppa::output::TRACE_HEADER;

fn sppa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sppa")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_into(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    sppa(&args)
}

fn verify(config: &Path) -> Output {
    sppa(&["verify", "--config", config.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const IDENTITY: &str = r#"{
    "schema_version": 1,
    "problem": {"kind": "custom", "members": [
        {"operator": {"type": "affine", "m": [[1.0, 0.0], [0.0, 1.0]], "b": [0.0, 0.0]}, "weight": 1.0}
    ], "solution": [0.0, 0.0]},
    "x0": [3.0, -1.0],
    "schedule": {"lambda0": 1.0, "gamma": 0.75, "n0": 0},
    "iterations": 10
}"#;

fn summary_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn identity_member_contracts_by_the_step_product() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", IDENTITY);
    let out = dir.path().join("out");
    let o = run_into(&config, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let trace = fs::read_to_string(out.join("trace_0.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], TRACE_HEADER.join(","));
    assert_eq!(lines.len(), 11);

    // x_N = x0 Π (1 + λ_k)^(-1)
    let factor: f64 = (0..10u32).map(|k| 1.0 / (1.0 + (k as f64 + 1.0).powf(-0.75))).product();
    let rows = summary_rows(&out.join("summary.csv"));
    let header = &rows[0];
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let x1: f64 = rows[1][col("x_1")].parse().unwrap();
    let x2: f64 = rows[1][col("x_2")].parse().unwrap();
    assert!((x1 - 3.0 * factor).abs() <= 1e-14, "{x1} vs {}", 3.0 * factor);
    assert!((x2 + factor).abs() <= 1e-14);

    let norm_x: f64 = lines[10].split(',').nth(7).unwrap().parse().unwrap();
    assert!((norm_x - factor * 10f64.sqrt()).abs() <= 1e-14);

    let solution: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(solution["solution"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn replicas_get_one_trace_each_and_a_summary_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = IDENTITY.replace("\"iterations\": 10", "\"iterations\": 50, \"replicas\": 4, \"workers\": 2");
    let config = write_config(dir.path(), "c.json", &text);
    let out = dir.path().join("out");
    let o = run_into(&config, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for r in 0..4 {
        assert!(out.join(format!("trace_{r}.csv")).is_file());
    }
    assert!(!out.join("trace_4.csv").exists());
    let rows = summary_rows(&out.join("summary.csv"));
    assert_eq!(rows.len(), 5);
    let replicas: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(replicas, ["0", "1", "2", "3"]);
}

#[test]
fn gamma_below_one_half_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &IDENTITY.replace("\"gamma\": 0.75", "\"gamma\": 0.4"));
    let o = run_into(&config, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("schedule.gamma") && err.contains("l2 minus l1"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &IDENTITY.replace("\"iterations\": 10", "\"iterations\": 10, \"seed\": 4"));
    let o = run_into(&config, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`seed`"), "{}", stderr(&o));

    let config = write_config(dir.path(), "d.json", &IDENTITY.replace("\"x0\": [3.0, -1.0]", "\"x0\": [3.0]"));
    let o = run_into(&config, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("x0"), "{}", stderr(&o));
}

#[test]
fn overflowing_iterates_abort_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = IDENTITY
        .replace("\"m\": [[1.0, 0.0], [0.0, 1.0]], \"b\": [0.0, 0.0]", "\"m\": [[0.0, 0.0], [0.0, 0.0]], \"b\": [-1e308, 0.0]")
        .replace(", \"solution\": [0.0, 0.0]", "")
        .replace("\"x0\": [3.0, -1.0]", "\"x0\": [1e308, 0.0]");
    let config = write_config(dir.path(), "c.json", &text);
    let o = run_into(&config, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("step 1"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", IDENTITY);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run_into(&config, &blocker.join("out"), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let o = run_into(&dir.path().join("missing.json"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_config_gives_byte_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
        "schema_version": 1,
        "problem": {"kind": "feasibility", "sets": [
            {"type": "halfspace", "normal": [-1, 0], "offset": 0},
            {"type": "halfspace", "normal": [0, -1], "offset": 0},
            {"type": "halfspace", "normal": [1, 1], "offset": 2}
        ]},
        "x0": [5, -3],
        "iterations": 3000,
        "replicas": 3,
        "master_seed": 42
    }"#;
    let config = write_config(dir.path(), "c.json", text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_into(&config, &a, &[]).status.code(), Some(0));
    assert_eq!(run_into(&config, &b, &[]).status.code(), Some(0));
    for r in 0..3 {
        let name = format!("trace_{r}.csv");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    assert_ne!(fs::read(a.join("trace_0.csv")).unwrap(), fs::read(a.join("trace_1.csv")).unwrap());

    let c = dir.path().join("c");
    assert_eq!(run_into(&config, &c, &["--seed", "43"]).status.code(), Some(0));
    assert_ne!(fs::read(a.join("trace_0.csv")).unwrap(), fs::read(c.join("trace_0.csv")).unwrap());
}

#[test]
fn iteration_override_shortens_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", IDENTITY);
    let out = dir.path().join("out");
    assert_eq!(run_into(&config, &out, &["--iters", "4"]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(out.join("trace_0.csv")).unwrap().lines().count(), 5);
}

#[test]
fn verify_prints_a_feasible_point() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
        "schema_version": 1,
        "problem": {"kind": "feasibility", "sets": [
            {"type": "box", "lower": [1, 1], "upper": [3, 3]},
            {"type": "ball", "center": [0, 0], "radius": 2}
        ]},
        "x0": [0, 0],
        "iterations": 10
    }"#;
    let o = verify(&write_config(dir.path(), "c.json", text));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("x*: [1.0000000000000000e0, 1.0000000000000000e0]"), "{text}");
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("certificate residual: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual <= 1e-9);
}

#[test]
fn verify_prints_the_strongly_monotone_solution() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
        "schema_version": 1,
        "problem": {"kind": "strongly_monotone", "members": [
            {"m": [[2, 0], [0, 2]], "b": [-2, 0], "weight": 0.5},
            {"m": [[2, 1], [-1, 2]], "b": [-2, 1], "weight": 0.5}
        ]},
        "x0": [0, 0],
        "iterations": 10
    }"#;
    let o = verify(&write_config(dir.path(), "c.json", text));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // x* = -M̄⁻¹ b̄ by Cramer's rule on the averaged pair.
    let (m, b) = ([[2.0, 0.5], [-0.5, 2.0]], [-2.0, 0.5]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let expected = [(-b[0] * m[1][1] + b[1] * m[0][1]) / det, (-b[1] * m[0][0] + b[0] * m[1][0]) / det];
    let line = stdout(&o).lines().find(|l| l.starts_with("x*: ")).unwrap().to_string();
    let coords: Vec<f64> = line
        .trim_start_matches("x*: [")
        .trim_end_matches(']')
        .split(", ")
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((coords[0] - expected[0]).abs() < 1e-14 && (coords[1] - expected[1]).abs() < 1e-14, "{coords:?}");
}

#[test]
fn verify_rejects_disjoint_sets() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
        "schema_version": 1,
        "problem": {"kind": "feasibility", "sets": [
            {"type": "box", "lower": [0, 0], "upper": [1, 1]},
            {"type": "box", "lower": [2, 2], "upper": [3, 3]}
        ]},
        "x0": [0, 0],
        "iterations": 10
    }"#;
    let o = verify(&write_config(dir.path(), "c.json", text));
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("NoConvergence") || stderr(&o).contains("EmptyIntersection"), "{}", stderr(&o));
    assert!(stderr(&o).contains("no convergence"), "{}", stderr(&o));
}
