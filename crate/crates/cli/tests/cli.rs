use std::path::Path;
use std::process::{Command, Output};

fn qeilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qeilab")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn qei_bound_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = qeilab(&["--out", dir.path().to_str().unwrap(), "qei", "bound", "--g", "bump:1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let env = stdout_json(&out);
    let v = env["results"]["value"]["value"].as_f64().unwrap();
    assert!((v - 5.187480725007098e-3).abs() / 5.187480725007098e-3 < 1e-4, "{v}");
    assert_eq!(env["pass"], true);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["config_hash"], env["config_hash"]);
    assert_eq!(report["seed"], 1729);
}

#[test]
fn qei_sweep_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = qeilab(&["--out", dir.path().to_str().unwrap(), "qei", "sweep", "--parameter", "width", "--values", "0.5,1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|x| x == "csv")).collect();
    assert!(!csv.is_empty());
    let text = std::fs::read_to_string(&csv[0]).unwrap();
    assert!(text.starts_with("# qeilab"));
    assert!(text.lines().filter(|l| !l.starts_with('#')).count() >= 4);
}

#[test]
fn toy_lpe_on_written_demo_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("demo.json");
    assert!(qeilab(&["--out", file.to_str().unwrap(), "toy", "demo"]).status.success());
    let out = qeilab(&["--no-csv", "--no-plot", "toy", "lpe", "--scenario", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["pass"], true);
}

#[test]
fn empty_config_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, "{}").unwrap();
    let out = qeilab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
}

#[test]
fn config_run_is_deterministic_up_to_volatile_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("kappa.json");
    std::fs::write(&cfg, r#"{"schema_version": 1, "seed": 11, "command": {"run": "geom-kappa", "mass": 1, "lmin": 2, "lmax": 8, "steps": 7}}"#).unwrap();
    let strip = |mut v: serde_json::Value| {
        for k in ["started_at", "finished_at", "timings"] {
            v.as_object_mut().unwrap().remove(k);
        }
        v
    };
    let a = qeilab(&["--no-csv", "--no-plot", "run", "--config", cfg.to_str().unwrap()]);
    let b = qeilab(&["--no-csv", "--no-plot", "run", "--config", cfg.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    let (a, b) = (stdout_json(&a), stdout_json(&b));
    assert_eq!(a["seed"], 11);
    assert_eq!(strip(a), strip(b));
}

#[test]
fn acceptance_subset_by_module() {
    let out = qeilab(&["acceptance", "--only", "matrix-worlds"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("criterion")).count(), 1, "{text}");
    assert!(text.contains("criterion  9"));
    assert!(text.contains("acceptance: 1/1 criteria passed"));
}

#[test]
fn impossible_tolerance_is_reported_as_configuration_induced() {
    let out = qeilab(&["--tolerance", "13=1e-20", "acceptance", "--only", "13"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "{text}");
    assert!(text.contains("FAIL (configuration-induced)"), "{text}");
}

#[test]
fn torus_check_rejects_missing_file() {
    let out = qeilab(&["geom", "torus-check", "--scenario", "/nonexistent/torus.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn torus_check_on_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("torus.json");
    std::fs::write(&file, r#"{"schema_version": 1, "sampling": {"family": "bump", "center": 0, "scale": 1, "amplitude": 1}, "mass": 1}"#).unwrap();
    let out = qeilab(&["--no-csv", "--no-plot", "geom", "torus-check", "--scenario", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let env = stdout_json(&out);
    assert_eq!(env["results"]["holds"], true);
    assert!(env["results"]["gap"].as_f64().unwrap() >= -1e-6);
}
