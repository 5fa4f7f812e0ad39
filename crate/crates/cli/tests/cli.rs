use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qnl_cli::output::{budget_from_csv, budget_from_json, budget_to_csv, budget_to_json, figure_from_csv, FIGURE_COLUMNS};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn qnl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnl")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn budget_csv_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("budget.csv");
    let o = qnl(&["budget", &config("oscillator.json"), "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("inf"));
    let table = budget_from_csv(&text).unwrap();
    assert_eq!(table.rows.len(), 101);
    assert_eq!(budget_to_csv(&table), text);
}

#[test]
fn budget_json_round_trip_is_byte_identical() {
    let o = qnl(&["budget", &config("optical_spring.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let table = budget_from_json(&text).unwrap();
    assert_eq!(table.rows.len(), 200);
    assert_eq!(budget_to_json(&table), text);
    // --format overrides the config
    let o = qnl(&["budget", &config("optical_spring.json"), "--format", "csv"]);
    let csv = stdout(&o);
    assert_eq!(budget_from_csv(&csv).unwrap(), table);
}

#[test]
fn lossless_threshold_is_null_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("free.json");
    std::fs::write(
        &cfg,
        r#"{"probe": {"type": "free_mass", "mass": 1, "damping": 0},
            "grid": {"start": 1, "stop": 2, "points": 2}, "mode": "fixed_sff", "s_ff": 1}"#,
    )
    .unwrap();
    let o = qnl(&["budget", cfg.to_str().unwrap(), "--format", "json"]);
    let text = stdout(&o);
    assert!(text.contains("\"s_thr\": null"), "{text}");
    assert_eq!(budget_to_json(&budget_from_json(&text).unwrap()), text);
    let o = qnl(&["budget", cfg.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.lines().nth(3).unwrap().split(',').nth(3) == Some("inf"), "{text}");
    assert_eq!(budget_to_csv(&budget_from_csv(&text).unwrap()), text);
}

#[test]
fn output_is_stable_across_runs_and_jobs() {
    let a = qnl(&["budget", &config("optical_spring.json"), "--jobs", "1"]);
    let b = qnl(&["budget", &config("optical_spring.json"), "--jobs", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_passes_on_shipped_configs() {
    for name in ["oscillator.json", "optical_spring.json", "spin_figure.json"] {
        let o = qnl(&["verify", &config(name), "--seed", "7"]);
        let text = stdout(&o);
        assert_eq!(o.status.code(), Some(0), "{name}\n{text}");
        assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
        assert!(text.contains("oracle_agreement"));
    }
}

#[test]
fn fdt_violation_exits_one_with_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"probe": {"type": "damped_oscillator", "mass": 1, "omega0": 1, "damping": 0.2},
            "back_action": {"type": "constant", "re": 0, "im": 0.5},
            "grid": {"start": 0.7, "stop": 1.5, "points": 5}, "mode": "fixed_sff", "s_ff": 0.1}"#,
    )
    .unwrap();
    for cmd in ["budget", "verify"] {
        let o = qnl(&[cmd, cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1));
        let err = stderr(&o);
        assert!(err.contains("omega = 0.7") && err.contains("FDT bound"), "{err}");
    }
}

#[test]
fn config_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, "{\n  \"probe\": {\"type\": \"free_mass\", \"mass\": 1, \"damping\": 0},\n  \"mode\": \"fixed_sf\"\n}\n").unwrap();
    let o = qnl(&["budget", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("mode"), "{err}");

    let o = qnl(&["budget", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tampered_golden_reports_first_differing_row() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("golden.csv");
    let o = qnl(&["budget", &config("oscillator.json"), "--output", golden.to_str().unwrap()]);
    assert!(o.status.success());

    let o = qnl(&["verify", &config("oscillator.json"), "--golden", golden.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let text = std::fs::read_to_string(&golden).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // header block is 5 lines (2 comments, 2 transitions, column names); row 17 follows
    let target = 5 + 17;
    let mut cells: Vec<String> = lines[target].split(',').map(String::from).collect();
    cells[4] = "0.5".into();
    lines[target] = cells.join(",");
    std::fs::write(&golden, lines.join("\n") + "\n").unwrap();

    let o = qnl(&["verify", &config("oscillator.json"), "--golden", golden.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.contains("golden")).unwrap();
    assert!(line.starts_with("FAIL") && line.contains("first differing row 17") && line.contains("s_sum_opt"), "{line}");
}

#[test]
fn spin_figure_emits_three_series() {
    let o = qnl(&["spin-figure", &config("spin_figure.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1).unwrap(), FIGURE_COLUMNS.join(","));
    let rows = figure_from_csv(&text).unwrap();
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().all(|r| r.full <= r.sigma_zero && r.full <= r.spin_matched && r.full >= r.dql));

    let o = qnl(&["spin-figure", &config("spin_figure.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 201);
    assert_eq!(v["s_thr0"], 0.1);
}

#[test]
fn spin_figure_without_sweep_is_a_config_error() {
    let o = qnl(&["spin-figure", &config("oscillator.json")]);
    assert_eq!(o.status.code(), Some(1));
}
