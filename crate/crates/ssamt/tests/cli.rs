//! End-to-end runs of the `ssamt` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use ssamt_core::simulation::GaussianSource;
use tempfile::TempDir;

const AIS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/ais.csv");

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssamt")).args(args).output().expect("spawn ssamt")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "ssamt {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_columns(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn rejections(report: &Value, procedure: &str) -> u64 {
    report["procedures"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["procedure"] == procedure)
        .unwrap()["rejection_count"]
        .as_u64()
        .unwrap()
}

#[test]
fn method_none_passes_values_through() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "in.csv", "a,b\n1.5,2\n-3,0.1\n4,5e-3\n7,8\n");
    ok(&["denoise", "--input", s(&input), "--method", "none", "--output-dir", s(dir.path())]);
    let out = std::fs::read_to_string(dir.path().join("denoised.csv")).unwrap();
    assert_eq!(out, "a,b\n1.5,2\n-3,0.1\n4,0.005\n7,8\n");
    let report = json(&dir.path().join("diagnostics.json"));
    assert_eq!(report["preprocessing"]["method"], "none");
}

#[test]
fn full_rank_reproduces_input() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("x,y\n");
    let mut g = GaussianSource::new(3);
    for _ in 0..40 {
        writeln!(text, "{},{}", g.next_standard(), 10.0 * g.next_standard()).unwrap();
    }
    let input = write(dir.path(), "in.csv", &text);
    for method in ["ssa", "mssa"] {
        let out_dir = dir.path().join(method);
        ok(&["denoise", "--input", s(&input), "--method", method, "--rank", "full", "--output-dir", s(&out_dir)]);
        let (_, a) = read_columns(&input);
        let (_, b) = read_columns(&out_dir.join("denoised.csv"));
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
                assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0), "{method}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn ais_pipeline_reports_all_sections() {
    let dir = TempDir::new().unwrap();
    ok(&[
        "test", "--input", AIS, "--group-column", "sex", "--method", "mssa", "--window", "101",
        "--output-dir", s(dir.path()),
    ]);
    let report = json(&dir.path().join("report.json"));
    let keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["dataset", "preprocessing", "tests", "procedures", "diagnostics", "warnings"]);
    assert_eq!(report["preprocessing"]["L"], 101);
    assert_eq!(report["tests"].as_array().unwrap().len(), 11);
    assert_eq!(report["procedures"].as_array().unwrap().len(), 5);
    let vars = report["diagnostics"]["variables"].as_array().unwrap();
    assert_eq!(vars.len(), 11);
    for v in vars {
        assert!(v["w_correlation"].as_f64().unwrap().abs() < 0.1, "{v}");
    }
    for p in ["bonferroni", "holm"] {
        assert_eq!(rejections(&report, p), 10);
    }
    let (header, rows) = read_columns(&dir.path().join("denoised.csv"));
    assert_eq!(header.last().unwrap(), "sex");
    assert_eq!(rows.len(), 202);
}

#[test]
fn identical_groups_reject_nothing() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("u,v,w\n");
    let mut g = GaussianSource::new(11);
    for t in 0..60 {
        let t = t as f64;
        writeln!(text, "{},{},{}", (t / 5.0).sin() + g.next_standard(), g.next_standard(), t * 0.1).unwrap();
    }
    let a = write(dir.path(), "a.csv", &text);
    let b = write(dir.path(), "b.csv", &text);
    ok(&["test", "--input", s(&a), "--input", s(&b), "--output-dir", s(dir.path())]);
    let report = json(&dir.path().join("report.json"));
    for p in report["procedures"].as_array().unwrap() {
        assert_eq!(p["rejection_count"], 0, "{p}");
    }
    assert!(dir.path().join("denoised_1.csv").exists());
    assert!(dir.path().join("denoised_2.csv").exists());
}

#[test]
fn f_test_finds_shifted_variables() {
    let dir = TempDir::new().unwrap();
    let mut text = String::new();
    let names: Vec<String> = (0..10).map(|j| format!("v{j}")).collect();
    writeln!(text, "{},group", names.join(",")).unwrap();
    let mut g = GaussianSource::new(5);
    for (k, label) in ["a", "b", "c", "d"].iter().enumerate() {
        for _ in 0..30 {
            let row: Vec<String> = (0..10)
                .map(|j| {
                    let shift = if k == 3 && j < 3 { 5.0 } else { 0.0 };
                    (shift + g.next_standard()).to_string()
                })
                .collect();
            writeln!(text, "{},{label}", row.join(",")).unwrap();
        }
    }
    let input = write(dir.path(), "in.csv", &text);
    ok(&[
        "test", "--input", s(&input), "--group-column", "group", "--method", "none", "--test", "f",
        "--procedures", "bonferroni,holm", "--output-dir", s(dir.path()),
    ]);
    let report = json(&dir.path().join("report.json"));
    let tests = report["tests"].as_array().unwrap();
    assert_eq!(tests[0]["kind"], "one-way-F");
    assert_eq!(tests[0]["dof"], serde_json::json!([3.0, 116.0]));
    for p in report["procedures"].as_array().unwrap() {
        let d = p["decisions"].as_array().unwrap();
        assert!(d[..3].iter().all(|x| x == true), "{p}");
    }
}

#[test]
fn t_test_needs_two_groups() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "in.csv", "x,g\n1,a\n2,b\n3,c\n4,a\n5,b\n6,c\n");
    let out = run(&["test", "--input", s(&input), "--group-column", "g", "--method", "none", "--output-dir", s(dir.path())]);
    assert!(!out.status.success());
}

#[test]
fn invalid_arguments_fail_cleanly() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "in.csv", "x,g\n1,a\n2,b\n3,a\n4,b\n");
    let bad_alpha = run(&["test", "--input", s(&input), "--group-column", "g", "--alpha", "1.5", "--output-dir", s(dir.path())]);
    assert!(!bad_alpha.status.success());
    let bad_proc = run(&["test", "--input", s(&input), "--procedures", "bh", "--output-dir", s(dir.path())]);
    assert!(!bad_proc.status.success());
    let missing = run(&["denoise", "--input", s(&dir.path().join("nope.csv")), "--output-dir", s(dir.path())]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.csv"));
}

fn sinusoid_with_gaps() -> (String, Vec<usize>) {
    let gaps: Vec<usize> = (0..12).map(|i| 7 + 9 * i).collect();
    let mut text = String::from("t,x,y\n");
    for t in 0..120 {
        let x = (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin();
        let cell = if gaps.contains(&t) { "NA".to_string() } else { x.to_string() };
        writeln!(text, "{t},{cell},{}", t % 7).unwrap();
    }
    (text, gaps)
}

#[test]
fn impute_fills_sinusoid_gaps() {
    let dir = TempDir::new().unwrap();
    let (text, gaps) = sinusoid_with_gaps();
    let input = write(dir.path(), "in.csv", &text);
    ok(&["impute", "--input", s(&input), "--index-column", "--output-dir", s(dir.path())]);
    let report = json(&dir.path().join("imputation.json"));
    let x = &report["variables"][0];
    assert_eq!(x["variable"], "x");
    assert_eq!(x["missing"], 12);
    assert_eq!(x["converged"], true);
    assert!(x["iterations"].as_u64().unwrap() <= 100);
    assert_eq!(report["variables"][1]["missing"], 0);
    let (header, rows) = read_columns(&dir.path().join("imputed.csv"));
    assert_eq!(header, ["t", "x", "y"]);
    for &t in &gaps {
        let truth = (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin();
        let got: f64 = rows[t][1].parse().unwrap();
        assert!((got - truth).abs() <= 0.05, "t={t}: {got} vs {truth}");
    }
    let (_, original) = read_columns(&input);
    for (t, row) in original.iter().enumerate() {
        if !gaps.contains(&t) {
            assert_eq!(row, &rows[t]);
        }
    }
}

#[test]
fn impute_keeps_going_after_a_bad_column() {
    let dir = TempDir::new().unwrap();
    let (text, _) = sinusoid_with_gaps();
    let text: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 0 { format!("{l},dead\n") } else { format!("{l},NA\n") })
        .collect();
    let input = write(dir.path(), "in.csv", &text);
    ok(&["impute", "--input", s(&input), "--index-column", "--output-dir", s(dir.path())]);
    let report = json(&dir.path().join("imputation.json"));
    assert_eq!(report["variables"][0]["converged"], true);
    assert!(report["variables"][2]["error"].is_string());
    assert!(!report["warnings"].as_array().unwrap().is_empty());
    let (_, rows) = read_columns(&dir.path().join("imputed.csv"));
    assert!(rows.iter().all(|r| r[3] == "NA"));
}

#[test]
fn impute_without_gaps_is_an_error() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "in.csv", "x\n1\n2\n3\n4\n");
    let out = run(&["impute", "--input", s(&input), "--output-dir", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nothing to impute"));
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let common = ["simulate", "--replications", "20", "--window", "10,50", "--seed", "9"];
    ok(&[&common[..], &["--threads", "1", "--output-dir", s(&a)]].concat());
    ok(&[&common[..], &["--threads", "3", "--output-dir", s(&b)]].concat());
    for f in ["simulation.json", "simulation.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let reports = json(&a.join("simulation.json"));
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 4);
    for r in reports {
        assert_eq!(r["windows"], serde_json::json!([10, 50]));
        assert_eq!(r["replications"], 20);
    }
    let csv = std::fs::read_to_string(a.join("simulation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8);
}

#[test]
fn simulate_rejects_unknown_model() {
    let dir = TempDir::new().unwrap();
    let out = run(&["simulate", "--model", "sawtooth", "--output-dir", s(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["sine_plus_exp", "cosine_plus_linear", "sine_times_exp", "sine_linear_exp"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.conf",
        "# AIS run\ngroup_column = sex\nmethod = mssa\nwindow = 101\nprocedures = bonferroni,holm\nseed = 4\n",
    );
    let out_a = dir.path().join("a");
    ok(&["test", "--config", s(&cfg), "--input", AIS, "--output-dir", s(&out_a)]);
    let report = json(&out_a.join("report.json"));
    assert_eq!(report["preprocessing"]["method"], "mssa");
    assert_eq!(report["preprocessing"]["L"], 101);
    assert_eq!(report["procedures"].as_array().unwrap().len(), 2);

    let out_b = dir.path().join("b");
    ok(&["test", "--config", s(&cfg), "--input", AIS, "--method", "none", "--output-dir", s(&out_b)]);
    assert_eq!(json(&out_b.join("report.json"))["preprocessing"]["method"], "none");

    let bad = write(dir.path(), "bad.conf", "windw = 5\n");
    assert!(!run(&["denoise", "--config", s(&bad), "--input", AIS]).status.success());
}
