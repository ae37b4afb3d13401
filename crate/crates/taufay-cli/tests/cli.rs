use std::path::Path;
use std::process::{Command, Output};

fn taufay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taufay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.in.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn passing_suite_exits_zero_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "{}");
    let out = dir.path().join("out");
    let o = taufay(&["run", "--suite", "hirota_ops", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["report.json", "report.csv", "plot_data.csv", "config.json", "timings.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["suite"], "hirota_ops");
    assert_eq!(rep["summary"]["failed"], 0);
    assert_eq!(std::fs::read_to_string(out.join("plot_data.csv")).unwrap(), "suite,series,x,y\n");
}

#[test]
fn reruns_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"fay_genus0": {"configs_per_n": 5}}"#);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, jobs) in [(&a, "1"), (&b, "4")] {
        let o = taufay(&[
            "run", "--suite", "fay_genus0", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "99", "--jobs", jobs,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["report.json", "report.csv", "plot_data.csv", "config.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_flag_and_defaults_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"seed": 3}"#);
    let out = dir.path().join("out");
    let o = taufay(&["run", "--suite", "theta_props", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["seed"], 7);
    assert_eq!(echo["theta_props"]["oracle_radius"], 12);
    assert_eq!(echo["matrix_fay"]["sizes"], serde_json::json!([2, 3]));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"theta_props": {"tolerance": 1e-30}}"#);
    let out = dir.path().join("out");
    let o = taufay(&["run", "--suite", "theta_props", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL theta_props/"));
    assert!(out.join("report.json").exists());
}

#[test]
fn config_errors_point_at_the_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"fay_genus0": {"tolerance": "small"}}"#);
    let o = taufay(&["run", "--suite", "fay_genus0", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/fay_genus0/tolerance"), "{}", stderr(&o));
    let cfg = config(dir.path(), r#"{"fay_genus1": {"taus": [{"re": 0.0, "im": -1.0}]}}"#);
    let o = taufay(&["run", "--suite", "fay_genus1", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/fay_genus1/taus/0"), "{}", stderr(&o));
}

#[test]
fn unknown_or_empty_suite_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "{}");
    for suite in ["nope", ""] {
        let o = taufay(&["run", "--suite", suite, "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        let e = stderr(&o);
        assert!(e.contains("hirota_ops") && e.contains("Usage"), "{e}");
    }
    let o = taufay(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--suite"));
}

#[test]
fn missing_config_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let o = taufay(&["run", "--suite", "all", "--config", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.json"));
}
