//! End-to-end tests of the `qcrb` binary: exit codes, file outputs,
//! reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use qcrb_core::stats::linear_fit;

fn qcrb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcrb"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bound_command_reports_displacement_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bound.json",
        r#"{"model": "displacement", "params": {"N": 1e6, "w": 1.0}, "grid": {"min": -8, "max": 8, "points": 1024}}"#,
    );
    let out = qcrb(&["bound", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("out/report.json"));
    let bound = report["bound_linearized"].as_f64().unwrap();
    assert!((bound - 5e-4).abs() < 1e-12, "bound_linearized = {bound}");
}

#[test]
fn bound_command_with_six_db_phase_squeezing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bound.json",
        r#"{"model": "phase", "params": {"N": 100, "squeeze_db": 6.02059991327962}, "grid": {"min": -8, "max": 8, "points": 1024}}"#,
    );
    let out = qcrb(&["bound", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success());
    let report = read_json(&dir.path().join("out/report.json"));
    // 6.0206 dB is exactly σ² = 1/4, so the bound halves to 0.025
    let bound = report["delta_theta_min"].as_f64().unwrap();
    assert!((bound - 0.025).abs() < 1e-9, "bound = {bound}");
}

#[test]
fn bound_report_shows_all_three_factors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bound.json",
        r#"{"model": "amplitude", "params": {"N": 100, "m": 1.0}}"#,
    );
    let out = qcrb(&["bound", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success());
    let report = read_json(&dir.path().join("out/report.json"));
    // amplitude model: no mode-shape term, all information in N′
    assert!(report["u_prime_norm_sq"].as_f64().unwrap().abs() < 1e-12);
    assert!((report["n_prime"].as_f64().unwrap() - 200.0).abs() < 1e-6);
    assert!((report["n"].as_f64().unwrap() - 100.0).abs() < 1e-9);
}

#[test]
fn unknown_config_key_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"model": "phase", "params": {"N": 100}, "typo_key": true}"#,
    );
    let out = qcrb(&["bound", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("typo_key"), "{err}");
}

#[test]
fn degenerate_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // squeeze-param has no detection mode: simulate cannot calibrate
    let cfg = write_config(
        dir.path(),
        "sim.json",
        r#"{"model": "squeeze-param", "repetitions": 10}"#,
    );
    let out = qcrb(&["simulate", "--config", &cfg, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    // vacuum family carries no information at all
    let cfg = write_config(dir.path(), "bound.json", r#"{"model": "vacuum"}"#);
    let out = qcrb(&["bound", "--config", &cfg, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oracle_check_passes_on_builtins_and_random_cases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "oracle.json",
        r#"{"model": "all", "random_families": 12, "random_pairs": 20, "seed": 7}"#,
    );
    let out = qcrb(&["oracle-check", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/oracle_check.csv")).unwrap();
    assert!(csv.starts_with("case_id,i_fisher_direct,i_fisher_overlap,rel_err"));
    // squeeze-param pins the prefactor: both routes give 2
    let squeeze_row = csv.lines().find(|l| l.starts_with("model-squeeze-param")).unwrap();
    let fields: Vec<&str> = squeeze_row.split(',').collect();
    let direct: f64 = fields[1].parse().unwrap();
    let overlap: f64 = fields[2].parse().unwrap();
    assert!((direct - 2.0).abs() < 1e-9, "{direct}");
    assert!((overlap - 2.0).abs() < 2e-4, "{overlap}");
    // vacuum is reported as skipped
    assert!(csv.contains("model-vacuum-skipped"));
    let summary = read_json(&dir.path().join("out/oracle_summary.json"));
    assert_eq!(summary["passed"], serde_json::Value::Bool(true));
}

#[test]
fn simulate_saturation_demo_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.json",
        r#"{"model": "phase", "params": {"N": 100, "squeeze_db": 6.0},
            "lo": {"mode": "detection", "phase": 0.0, "photons": 1e8},
            "samples": 1, "repetitions": 100000, "seed": 42, "theta_true": 0.01}"#,
    );
    let out = qcrb(&["simulate", "--config", &cfg, "--out", "a"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("a/summary.json"));
    let ratio = summary["ratio"].as_f64().unwrap();
    assert!((0.98..=1.02).contains(&ratio), "ratio {ratio}");

    // identical config + seed → byte-identical outputs
    let out = qcrb(&["simulate", "--config", &cfg, "--out", "b"], dir.path());
    assert!(out.status.success());
    for name in ["summary.json", "repetitions.csv"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn simulate_flags_wrong_local_oscillator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.json",
        r#"{"model": "displacement", "params": {"N": 100, "w": 1.0},
            "lo": {"mode": {"hg": 2}}, "samples": 1, "repetitions": 500, "seed": 5}"#,
    );
    let out = qcrb(&["simulate", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("out/summary.json"));
    assert_eq!(summary["no_signal"], serde_json::Value::Bool(true));
    assert!(summary["empirical_delta_theta"].is_null(), "divergent δθ serializes as null");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("no first-order signal"), "{stdout}");
}

#[test]
fn simulate_n_sweep_has_half_power_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        r#"{"model": "phase", "params": {"N": 100},
            "samples": 1, "repetitions": 100000, "seed": 42, "theta_true": 0.001,
            "sweep": {"param": "N", "from": 1e3, "to": 1e7, "points": 5, "log": true}}"#,
    );
    let out = qcrb(&["simulate", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let mut log_n = Vec::new();
    let mut log_d = Vec::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        log_n.push(f[0].parse::<f64>().unwrap().ln());
        log_d.push(f[1].parse::<f64>().unwrap().ln());
    }
    let (slope, _) = linear_fit(&log_n, &log_d);
    assert!(
        (slope + 0.5).abs() <= 0.005,
        "log-log slope {slope} deviates from −1/2 by more than 1%"
    );
    assert!(dir.path().join("out/plot.svg").exists());
}

#[test]
fn allocate_command_certifies_and_audits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "alloc.json",
        r#"{"bank_db": [6.0, 3.0, 0.0], "trials": 200, "seed": 7}"#,
    );
    let out = qcrb(&["allocate", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("out/allocation.json"));
    assert_eq!(report["optimizer"]["optimal"], serde_json::Value::Bool(true));
    assert_eq!(report["audit"]["passed"], serde_json::Value::Bool(true));
    // squeezer 0 (6 dB) feeds the detection mode
    assert_eq!(report["routing"][0].as_u64(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("out/trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);

    let out = qcrb(&["allocate", "--config", &cfg, "--out", "out2"], dir.path());
    assert!(out.status.success());
    for name in ["allocation.json", "trials.csv"] {
        let a = std::fs::read(dir.path().join("out").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("out2").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn modes_command_writes_detection_basis_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "modes.json",
        r#"{"model": "displacement", "params": {"N": 100, "w": 1.0}, "count": 3}"#,
    );
    let out = qcrb(&["modes", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let basis: Vec<String> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/basis.json")).unwrap())
            .unwrap();
    assert_eq!(basis, vec!["mode_000.csv", "mode_001.csv", "mode_002.csv"]);
    let first = std::fs::read_to_string(dir.path().join("out/mode_000.csv")).unwrap();
    assert!(first.starts_with("coordinate,re,im"));
    assert_eq!(first.lines().count(), 1025);
}

#[test]
fn bound_sweep_command_writes_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        r#"{"model": "displacement", "params": {"N": 1e4, "w": 1.0}, "q": 1,
            "sweep": {"param": "N", "from": 1e3, "to": 1e5, "points": 3, "log": true}}"#,
    );
    let out = qcrb(&["sweep", "--config", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "model,param,value,n,q,i_mean_term,i_cov_term,i_full,gamma_inv_11,bound_full,bound_linearized"
    );
    assert_eq!(csv.lines().count(), 4);
}
