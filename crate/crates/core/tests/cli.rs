//! End-to-end checks of the command-line interface: the exit-code contract
//! (0 = done, 1 = bad input, 2 = refutation found), file outputs, and
//! byte-identical reruns under a fixed seed.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_snowflake-lab")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "snowflake-lab-test-{tag}-{}",
        std::process::id()
    ));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &PathBuf, content: &str) {
    std::fs::write(path, content).unwrap();
}

const K13_JSON: &str = r#"{
  "schema": "snowflake-lab/1",
  "labels": ["c", "a", "b", "d"],
  "dist": [
    [0, 1, 1, 1],
    [1, 0, 2, 2],
    [1, 2, 0, 2],
    [1, 2, 2, 0]
  ]
}"#;

const NEAR_COLLINEAR_CSV: &str = "label,x1,x2\np0,0.0,0.0\np1,1.0,0.0\np2,2.0,0.000001\n";

#[test]
fn validate_reports_and_exits_zero() {
    let dir = temp_dir("validate");
    let input = dir.join("m.json");
    write(&input, K13_JSON);
    let out = run(&["validate", "--in", input.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"is_metric\": true"));
}

#[test]
fn validate_accepts_csv() {
    let dir = temp_dir("validate-csv");
    let input = dir.join("m.csv");
    write(
        &input,
        "a,b,c\n0,1,2\n1,0,1\n2,1,0\n",
    );
    let out = run(&["validate", "--in", input.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"is_metric\": true"));
}

#[test]
fn malformed_input_exits_one() {
    let dir = temp_dir("badinput");
    let input = dir.join("m.json");
    write(&input, "{\"schema\": \"snowflake-lab/1\", \"labels\": [\"a\"], \"dist\": [[0, 1]]}");
    let out = run(&["validate", "--in", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let out = run(&["validate", "--in", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_exits_one() {
    let out = run(&["validate", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["not-a-subcommand"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn certify_alpha_exit_codes() {
    let dir = temp_dir("certify");
    let pts = dir.join("near.csv");
    write(&pts, NEAR_COLLINEAR_CSV);
    let outdir = dir.join("out");
    let out = run(&[
        "certify-alpha",
        "--points",
        pts.to_str().unwrap(),
        "--alpha",
        "0.5",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "refutation must exit 2");
    assert!(outdir.join("certificate.json").exists());
    assert!(outdir.join("transcript.txt").exists());
    assert!(outdir.join("report.json").exists());
    let cert = std::fs::read_to_string(outdir.join("certificate.json")).unwrap();
    assert!(cert.contains("pulled-back triangle inequality violated"));

    // Equilateral triangle: no refutation, exit 0.
    let eq = dir.join("eq.csv");
    write(
        &eq,
        "label,x1,x2\np0,0.0,0.0\np1,1.0,0.0\np2,0.5,0.8660254037844386\n",
    );
    let out = run(&[
        "certify-alpha",
        "--points",
        eq.to_str().unwrap(),
        "--alpha",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("no-refutation"));
}

#[test]
fn certify_h_witness_unavailable_exits_zero() {
    let dir = temp_dir("certify-h");
    let pts = dir.join("ray.csv");
    write(
        &pts,
        "label,x1,x2\np0,1.0,0.0\np1,4.0,0.0\np2,16.0,0.0\np3,64.0,0.0\n",
    );
    let out = run(&[
        "certify-h",
        "--points",
        pts.to_str().unwrap(),
        "--h",
        "t^0.5",
        "--mode",
        "unbounded",
    ]);
    assert_eq!(out.status.code(), Some(2), "ray must refute");

    // A gauge failing the decay axiom has no threshold: witness unavailable.
    let out = run(&[
        "certify-h",
        "--points",
        pts.to_str().unwrap(),
        "--h",
        "t+sqrt(t)",
        "--mode",
        "unbounded",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("witness-unavailable"));
}

#[test]
fn spiral_outputs_are_byte_identical_across_runs() {
    let dir = temp_dir("spiral-det");
    let out1 = dir.join("run1");
    let out2 = dir.join("run2");
    let args = |out: &PathBuf| {
        vec![
            "spiral".to_string(),
            "--h".into(),
            "t+sqrt(t)".into(),
            "--n".into(),
            "6".into(),
            "--recheck".into(),
            "500".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.to_str().unwrap().to_string(),
        ]
    };
    let r1 = Command::new(bin()).args(args(&out1)).output().unwrap();
    let r2 = Command::new(bin()).args(args(&out2)).output().unwrap();
    assert!(r1.status.success() && r2.status.success());
    assert_eq!(r1.stdout, r2.stdout, "stdout must be byte-identical");
    for name in ["report.json", "points.csv", "spiral.svg", "h.json"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn embed_writes_points_and_alpha_star_brackets() {
    let dir = temp_dir("embed");
    // The star path metric itself does not embed (its Gram matrix has a
    // negative eigenvalue), so use an equilateral metric for the
    // coordinate-file check.
    let eq = dir.join("eq.json");
    write(
        &eq,
        r#"{"schema":"snowflake-lab/1","labels":["a","b","c","d"],
           "dist":[[0,1,1,1],[1,0,1,1],[1,1,0,1],[1,1,1,0]]}"#,
    );
    let outdir = dir.join("out");
    let out = run(&[
        "embed",
        "--in",
        eq.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(outdir.join("points.csv").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"min_dim\": 3"));

    let input = dir.join("m.json");
    write(&input, K13_JSON);
    let out = run(&["embed", "--in", input.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"embeddable\": false"));

    let out = run(&["alpha-star", "--in", input.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let boundary = report["boundaries"][0]["boundary"].as_f64().unwrap();
    assert!((boundary - 0.7924812503605781).abs() < 1e-6);
}

#[test]
fn threads_flag_and_env_do_not_change_results() {
    let dir = temp_dir("threads");
    let input = dir.join("m.json");
    write(&input, K13_JSON);
    let base = run(&["embed", "--in", input.to_str().unwrap()]);
    let threaded = run(&[
        "embed",
        "--in",
        input.to_str().unwrap(),
        "--threads",
        "3",
    ]);
    assert_eq!(base.stdout, threaded.stdout);
    let via_env = Command::new(bin())
        .args(["embed", "--in", input.to_str().unwrap()])
        .env("SNOWFLAKE_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(base.stdout, via_env.stdout);
}

#[test]
fn newton_iteration_limit_exits_one() {
    // The snowflaked star distances (scaled into a wide box) are not
    // realizable in any Euclidean space, so Gauss-Newton stalls.
    let dir = temp_dir("newton");
    let input = dir.join("rho.json");
    let a = 2f64.powf(0.9);
    write(
        &input,
        &format!(
            r#"{{
  "schema": "snowflake-lab/1",
  "labels": ["c", "a", "b", "d"],
  "dist": [
    [0, 1, 1, 1],
    [1, 0, {a}, {a}],
    [1, {a}, 0, {a}],
    [1, {a}, {a}, 0]
  ]
}}"#
        ),
    );
    let out = run(&[
        "newton",
        "--rho-file",
        input.to_str().unwrap(),
        "--rho-box",
        "0.95",
        "--max-iter",
        "60",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("iteration-limit"));
}

#[test]
fn every_subcommand_selftest_passes() {
    for sub in [
        "validate",
        "snowflake",
        "embed",
        "min-dim",
        "alpha-star",
        "newton",
        "john",
        "angles",
        "ramsey-floor",
        "spiral",
        "remark",
        "certify-alpha",
        "certify-h",
        "distortion",
    ] {
        let out = run(&[sub, "--selftest"]);
        assert!(
            out.status.success(),
            "{sub} selftest failed:\n{}",
            String::from_utf8_lossy(&out.stdout)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("0 failed"));
    }
}

#[test]
fn remark_subcommand_produces_files() {
    let dir = temp_dir("remark");
    let outdir = dir.join("out");
    let out = run(&[
        "remark",
        "--n",
        "5",
        "--slopes",
        "0.5,0.25,0.125",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for name in ["h.json", "points.csv", "points.svg", "report.json"] {
        assert!(outdir.join(name).exists(), "{name} missing");
    }
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"s4\": \"Holds\""));
}
