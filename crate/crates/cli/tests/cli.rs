use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levy_fluct::validate::ValidationReport;
use levy_fluct::LevyModel;
use tempfile::TempDir;

const MODEL_B: &str = r#"{"gamma": 2, "sigma2": 2, "jumps": {"family": "cp_exp", "rate": 1, "jump_rate": 1}}"#;
const BM: &str = r#"{"gamma": 0, "sigma2": 1}"#;
const BM_UP: &str = r#"{"gamma": 1, "sigma2": 1}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_levy-fluct"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn scale_table_matches_sinh() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "bm.json", BM);
    let out = run(&["scale-table", "--model", p(&model), "--qs", "2", "--xs", "0.1,0.5,1,3"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["q", "x", "W", "Z", "Wprime", "method", "est_error"]);
    assert_eq!(rows.len(), 4);
    for row in rows {
        let x: f64 = row[1].parse().unwrap();
        let w: f64 = row[2].parse().unwrap();
        // 1/(λ²/2 - 2) inverts to sinh(2x)
        assert!((w - (2.0 * x).sinh()).abs() <= 1e-12 * w, "{row:?}");
        let wp: f64 = row[4].parse().unwrap();
        assert!((wp - 2.0 * (2.0 * x).cosh()).abs() <= 1e-10 * wp);
    }
}

#[test]
fn intensity_table_reference_row() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "b.json", MODEL_B);
    let out = run(&["intensity-table", "--model", p(&model), "--betas", "2.5"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    let col = |name: &str| -> f64 {
        let i = header.iter().position(|h| h == name).unwrap();
        rows[0][i].parse().unwrap()
    };
    for (name, want) in [
        ("total", 3.75),
        ("negative_start_total", 1.0),
        ("cross_before", 0.25),
        ("upper_creep", 1.0),
        ("stay_positive_forever", 1.0),
        ("cross_after", 0.5),
    ] {
        assert!((col(name) - want).abs() <= 1e-8, "{name} = {}", col(name));
    }

    let out = run(&["intensity-table", "--model", p(&model), "--betas", "0.1,2.5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema"], "levy-fluct/1");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["beta"], 2.5);
    assert!(rows.iter().all(|r| r["within_tolerance"] == true));
}

#[test]
fn fluct_table_grid() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "bm.json", BM);
    let out = run(&["fluct-table", "--model", p(&model), "--qs", "0.5,2", "--xs", "-1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header[..5], ["q", "x", "u", "h", "hitting"]);
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let q: f64 = row[0].parse().unwrap();
        let x: f64 = row[1].parse().unwrap();
        let hitting: f64 = row[4].parse().unwrap();
        assert!((hitting - (-(2.0 * q).sqrt() * x.abs()).exp()).abs() < 1e-12);
        // passage quantities are blank below the barrier
        assert_eq!(row[5].is_empty(), x < 0.0);
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bv = write(
        &dir,
        "bv.json",
        r#"{"gamma": 1, "sigma2": 0, "jumps": {"family": "cp_exp", "rate": 1, "jump_rate": 1}}"#,
    );
    let out = run(&["validate", "--model", p(&bv)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bounded variation"));

    let good = write(&dir, "b.json", MODEL_B);
    assert_eq!(run(&["intensity-table", "--model", p(&good), "--betas="]).status.code(), Some(2));
    assert_eq!(run(&["intensity-table", "--model", p(&good)]).status.code(), Some(2));
    assert_eq!(run(&["intensity-table", "--model", p(&good), "--betas", "-1"]).status.code(), Some(2));

    let broken = write(&dir, "broken.json", r#"{"gamma": 1, "sigma2": }"#);
    assert_eq!(run(&["scale-table", "--model", p(&broken), "--qs", "1", "--xs", "1"]).status.code(), Some(2));
    let unknown = write(&dir, "unknown.json", r#"{"gamma": 1, "sigma2": 1, "drift": 3}"#);
    assert_eq!(run(&["validate", "--model", p(&unknown)]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--model", p(&dir.path().join("missing.json"))]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--model", p(&good), "--tol", "nonsense=1"]).status.code(), Some(2));

    let bm = write(&dir, "bm.json", BM);
    // oscillating models need an explicit horizon
    assert_eq!(run(&["simulate", "--model", p(&bm), "--estimator", "creep"]).status.code(), Some(2));
}

#[test]
fn validate_exit_status_follows_failures() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "b.json", MODEL_B);
    let report = dir.path().join("report.json");
    let out = run(&["validate", "--model", p(&model), "--deterministic", "--out", p(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed: ValidationReport = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed.ok());
    assert!(parsed.generated_at.is_none());

    let out = run(&["validate", "--model", p(&model), "--tol", "partition=-1"]);
    assert_eq!(out.status.code(), Some(1));
    let parsed: ValidationReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(parsed.summary.failed >= 1);
    assert!(parsed.generated_at.is_some());
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL excursion.partition"));
}

#[test]
fn reports_reparse() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "b.json", MODEL_B);
    let out = run(&["validate", "--model", p(&model), "--deterministic"]);
    let text = stdout(&out);
    let report: ValidationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.schema, "levy-fluct/1");
    assert_eq!(report.summary.total, report.checks.len());
    // the embedded model is itself a valid model document
    let embedded = LevyModel::from_json(&report.model.to_string()).unwrap();
    assert_eq!(embedded, LevyModel::from_json(MODEL_B).unwrap());
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);

    let out = run(&["scale-table", "--model", p(&model), "--qs", "0,1", "--xs", "0.5", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    assert_eq!(doc["rows"][0]["method"], "closed_form");
}

#[test]
fn simulate_report_fields() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "up.json", BM_UP);
    let out = run(&[
        "simulate",
        "--model",
        p(&model),
        "--estimator",
        "survive",
        "--grid",
        "x=1",
        "--paths",
        "4000",
        "--dt",
        "1e-3",
        "--seed",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["estimate", "stderr", "target", "zscore", "dt", "paths", "seed"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["paths"], 4000);
    assert_eq!(doc["seed"], 11);
    assert!((doc["target"].as_f64().unwrap() - (1.0 - (-2.0f64).exp())).abs() < 1e-12);
    assert!(doc["zscore"].as_f64().unwrap().abs() < 4.0);

    let bad = run(&["simulate", "--model", p(&model), "--estimator", "creep", "--grid", "a=1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn output_independent_of_thread_count() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "b.json", MODEL_B);
    let args = [
        "validate",
        "--model",
        p(&model),
        "--deterministic",
        "--with-mc",
        "--paths",
        "2000",
        "--dt",
        "1e-3",
        "--seed",
        "5",
    ];
    let one = run_env(&args, &[("LEVY_FLUCT_THREADS", "1")]);
    let three = run_env(&args, &[("LEVY_FLUCT_THREADS", "3")]);
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, three.stdout);

    let sim = ["simulate", "--model", p(&model), "--estimator", "passage", "--paths", "3000", "--dt", "1e-3"];
    let one = run_env(&sim, &[("LEVY_FLUCT_THREADS", "1")]);
    let three = run_env(&sim, &[("LEVY_FLUCT_THREADS", "3")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
}
