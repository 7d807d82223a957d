use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blockenc"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &Value) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_string_pretty(body).unwrap()).unwrap();
    p
}

#[test]
fn pca_power_on_fixture_recovers_top_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &serde_json::json!({
            "pipeline": "pca-power",
            "matrix": fixture("diag3.csv"),
            "parameters": { "eps": 1e-3 },
        }),
    );
    let out = dir.path().join("report.json");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let lambda = report["result"]["levels"][0]["eigenvalue"].as_f64().unwrap();
    assert!((lambda - 0.9).abs() <= 1e-3, "lambda = {lambda}");
    assert_eq!(report["config"]["parameters"]["seed"], 42);
    assert!(report["oracle_reads"].as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn missing_matrix_is_a_validation_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "solve",
        "--matrix",
        dir.path().join("absent.csv").to_str().unwrap(),
        "--vector",
        dir.path().join("absent_b.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn malformed_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("config.json");
    fs::write(&p, "{ \"pipeline\": \"no-such\" }").unwrap();
    assert_eq!(run(&["run", "--config", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    fs::write(&a, "0.5,0\n0,0\n").unwrap();
    let b = dir.path().join("b.csv");
    fs::write(&b, "1\n1\n").unwrap();
    let o = run(&["solve", "--matrix", a.to_str().unwrap(), "--vector", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn reruns_are_byte_identical() {
    let m = fixture("diag3.csv");
    let args = [
        "pca-gd",
        "--matrix",
        m.to_str().unwrap(),
        "--seed",
        "7",
        "--param",
        "eps=1e-4",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv_a = run(&[&args[..], &["--format", "csv"]].concat());
    let csv_b = run(&[&args[..], &["--format", "csv"]].concat());
    assert_eq!(csv_a.stdout, csv_b.stdout);
}

#[test]
fn seed_changes_the_start_vector() {
    let m = fixture("diag3.csv");
    let a = run(&["pca-power", "--matrix", m.to_str().unwrap(), "--seed", "1"]);
    let b = run(&["pca-power", "--matrix", m.to_str().unwrap(), "--seed", "2"]);
    let va: Value = serde_json::from_slice(&a.stdout).unwrap();
    let vb: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_ne!(va["result"]["levels"][0]["start_overlap"], vb["result"]["levels"][0]["start_overlap"]);
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn ode_sweep_writes_reports_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.csv");
    fs::write(&h, "0.5,0.1\n0.1,-0.3\n").unwrap();
    let out = dir.path().join("ode.json");
    let o = run(&[
        "simulate-ode",
        "--matrix",
        h.to_str().unwrap(),
        "--sweep",
        "N=8,16,32,64",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for n in [8, 16, 32, 64] {
        assert!(dir.path().join(format!("ode.N-{n}.json")).exists());
    }
    let (header, rows) = read_csv(&dir.path().join("ode.sweep.csv"));
    assert_eq!(header[0], "N");
    let col = header.iter().position(|h| h == "result.kappa").unwrap();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse::<f64>().unwrap().ln(), r[col].parse::<f64>().unwrap().ln()))
        .collect();
    let slope = (pts[3].1 - pts[0].1) / (pts[3].0 - pts[0].0);
    assert!((slope - 1.0).abs() <= 0.3, "slope {slope}");
}

#[test]
fn empty_sweep_gives_empty_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = run(&[
        "simulate-direct",
        "--matrix",
        fixture("diag3.csv").to_str().unwrap(),
        "--sweep",
        "t=",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("s.sweep.csv")).unwrap();
    assert_eq!(text.trim(), "t");
}

#[test]
fn solve_fidelity_improves_with_precision() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    fs::write(&a, "0.6,0.2,0\n0.2,-0.4,0.1\n0,0.1,0.3\n").unwrap();
    let b = dir.path().join("b.csv");
    fs::write(&b, "1\n0.5\n-0.25\n").unwrap();
    let out = dir.path().join("solve.json");
    let o = run(&[
        "solve",
        "--matrix",
        a.to_str().unwrap(),
        "--vector",
        b.to_str().unwrap(),
        "--sweep",
        "eps=1e-1,1e-2,1e-4,1e-6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("solve.sweep.csv"));
    let col = header.iter().position(|h| h == "delta.fidelity").unwrap();
    let fids: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
    assert!(fids.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{fids:?}");
}

#[test]
fn costs_table_as_csv() {
    let o = run(&[
        "costs",
        "--param",
        "n=1048576",
        "--param",
        "eps=1e-6",
        "--param",
        "kappa=100",
        "--param",
        "normF=1",
        "--param",
        "s=64",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("name,source,expression,value"));
    assert!(text.lines().any(|l| l.starts_with("solver/hhl,")));
    assert!(text.trim_end().ends_with("log(x) = ln(max(x, e))"));
}

#[test]
fn unbound_cost_symbol_is_numeric_error() {
    let o = run(&["costs", "--param", "n=16"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn subcommand_must_match_config_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &serde_json::json!({ "pipeline": "fit" }));
    assert_eq!(run(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
