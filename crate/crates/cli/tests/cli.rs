use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn optobell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optobell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn probe_vacuum_never_clicks() {
    let rec = stdout_json(&optobell(&["probe", "--p", "0"]));
    assert_eq!(rec["outputs"]["joint"], 1.0);
    assert_eq!(rec["outputs"]["correlator"], 1.0);
    assert_eq!(rec["command"], "probe");
}

#[test]
fn probe_pairs_without_displacement() {
    let rec = stdout_json(&optobell(&[
        "probe", "--p", "0.2", "--T", "1", "--eta", "1",
    ]));
    let joint = rec["outputs"]["joint"].as_f64().unwrap();
    assert!((joint - 0.8).abs() < 1e-12, "{joint}");
}

#[test]
fn probe_reads_config_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model": {"p": 0.2, "T": 0.5, "eta": 1, "n0": 0}, "settings": {"alpha1": [0.3, 0.1]}}"#,
    );
    let rec = stdout_json(&optobell(&["probe", "--config", &cfg, "--T", "1"]));
    assert_eq!(rec["inputs"]["model"]["T"], 1.0);
    assert_eq!(rec["inputs"]["model"]["p"], 0.2);
    assert_eq!(rec["inputs"]["alpha1"][1], 0.1);
}

#[test]
fn malformed_config_exits_2_naming_the_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"model": {"p": 1.2, "T": 1, "eta": 1, "n0": 0}}"#,
    );
    let out = optobell(&["probe", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`p`"), "{err}");

    let out = optobell(&["probe", "--p", "0.1", "--eta", "-0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`eta`"));

    let cfg = write(dir.path(), "typo.json", r#"{"modle": {}}"#);
    assert_eq!(
        optobell(&["probe", "--config", &cfg]).status.code(),
        Some(2)
    );
    assert_eq!(
        optobell(&["probe", "--config", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn chsh_violates_without_loss() {
    let rec = stdout_json(&optobell(&["chsh", "--p", "0.2", "--restarts", "8"]));
    assert!(rec["outputs"]["s_star"].as_f64().unwrap() > 2.0);
    assert_eq!(rec["seed"], 2015);
    assert!(rec["outputs"]["quad"]["a1"].is_array());
}

#[test]
fn chsh_below_threshold_transmission() {
    let rec = stdout_json(&optobell(&[
        "chsh",
        "--T",
        "0.3",
        "--optimize-p",
        "--restarts",
        "8",
    ]));
    assert!(rec["outputs"]["s_star"].as_f64().unwrap() <= 2.0 + 1e-4);
}

#[test]
fn chsh_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = optobell(&[
            "chsh",
            "--p",
            "0.3",
            "--T",
            "0.9",
            "--seed",
            "11",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let rec: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(rec["seed"], 11);
    assert!(rec.get("wall_clock_s").is_none());
}

#[test]
fn timing_is_opt_in() {
    let rec = stdout_json(&optobell(&["probe", "--p", "0.1", "--timing"]));
    assert!(rec["wall_clock_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn sweep_with_two_steps_writes_two_rows_and_a_chart() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let out = optobell(&[
        "sweep",
        "--axis",
        "T",
        "--min",
        "0.5",
        "--max",
        "1",
        "--steps",
        "2",
        "--p",
        "0.2",
        "--restarts",
        "4",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    let rec = stdout_json(&out);
    assert_eq!(rec["outputs"]["rows"], 2);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "axis_value,p,T,eta,n0,s_star,a1_re,a1_im,a1p_re,a1p_im,a2_re,a2_im,a2p_re,a2p_im,converged"
    );
    assert!(lines[2].starts_with("1.0,0.2,1.0,1.0,0.0,"));
    let chart = std::fs::read_to_string(&svg).unwrap();
    assert!(chart.contains("<polyline") && chart.contains("stroke-dasharray"));
}

#[test]
fn sweep_from_config_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"model": {"eta": 1, "n0": 0},
            "optimizer": {"restarts": 4, "seed": 5},
            "sweep": {"axis": "T", "min": 0.6, "max": 1.0, "steps": 3, "strategy": "p-optimized"}}"#,
    );
    let out = optobell(&["sweep", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn invalid_sweep_exits_2_and_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let out = optobell(&[
        "sweep",
        "--axis",
        "T",
        "--min",
        "0.5",
        "--max",
        "1",
        "--steps",
        "1",
        "--p",
        "0.2",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!csv.exists() && !svg.exists());

    // output directory missing for the second file: the first must not survive
    let out = optobell(&[
        "sweep",
        "--axis",
        "T",
        "--min",
        "0.5",
        "--max",
        "1",
        "--steps",
        "2",
        "--p",
        "0.2",
        "--restarts",
        "2",
        "--out",
        dir.path().join("nope/s.csv").to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!svg.exists());
}

#[test]
fn oracle_check_passes_on_a_small_suite() {
    let rec = stdout_json(&optobell(&["oracle-check", "--cases", "5"]));
    assert_eq!(rec["outputs"]["passed"], true);
    assert!(rec["outputs"]["max_deviation"].as_f64().unwrap() <= 1e-6);
    assert_eq!(rec["outputs"]["convention"]["rule"], "T");
    assert_eq!(rec["outputs"]["cases"].as_array().unwrap().len(), 5);
}

#[test]
fn oracle_check_lossless_reports_unit_constant() {
    let rec = stdout_json(&optobell(&["oracle-check", "--cases", "2", "--lossless"]));
    assert_eq!(rec["outputs"]["convention"]["constant"], 1.0);
    assert!(rec["outputs"]["convention"]["rule"].is_null());
}

#[test]
fn oracle_check_corrupted_closed_form_exits_1() {
    let out = optobell(&["oracle-check", "--cases", "2", "--corrupt", "1e-3"]);
    assert_eq!(out.status.code(), Some(1));
    let rec: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["outputs"]["passed"], false);
}

#[test]
fn oracle_check_invalid_config_exits_2() {
    assert_eq!(
        optobell(&["oracle-check", "--cases", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn device_maps_the_nanobeam_point() {
    let rec = stdout_json(&optobell(&["device", "--kappa-hz", "5e8", "--eta", "0.9"]));
    let p = rec["outputs"]["params"]["p"].as_f64().unwrap();
    assert!((p - 0.0899).abs() < 5e-4, "{p}");
    assert_eq!(rec["outputs"]["regime"]["sideband_ok"], true);
    let n_th = rec["outputs"]["regime"]["n_th"].as_f64().unwrap();
    assert!((n_th - 6.67).abs() < 0.01);
}

#[test]
fn device_rejects_invalid_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.json", r#"{"device": {"g0_hz": -1}}"#);
    let out = optobell(&["device", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g0"));
    assert_eq!(
        optobell(&["device", "--kappa-hz", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn feasibility_flags_regime_violations() {
    let rec = stdout_json(&optobell(&[
        "feasibility",
        "--kappa-min",
        "2e9",
        "--kappa-max",
        "2e9",
        "--kappa-steps",
        "1",
        "--restarts",
        "4",
    ]));
    let points = rec["outputs"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 1);
    assert_eq!(points[0]["regime"]["sideband_ok"], false);
    assert!(rec["outputs"]["summary"]["device_pump"]["attained"].is_boolean());
}
