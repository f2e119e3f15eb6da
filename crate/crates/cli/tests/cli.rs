//! Behavioral tests for the binary: artifact layout, number formatting,
//! strict scenario validation, and the exit-code mapping.

mod common;

use std::fs;

use common::{exit_code, lpsim, read_csv, scenario_dir, stderr, stdout};
use liepoisson_cli::config::ScenarioConfig;
use liepoisson_cli::run::RunSummary;
use tempfile::tempdir;

fn scenario(name: &str) -> String {
    scenario_dir().join(name).display().to_string()
}

#[test]
fn simulate_writes_csv_and_summary_that_agree() {
    let dir = tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let run = lpsim(&["simulate", &scenario("rigid_body_free.json"), "--out-dir", &out_dir]);
    assert_eq!(exit_code(&run), 0, "stderr: {}", stderr(&run));

    let csv = read_csv(&dir.path().join("rigid_body_free.csv"));
    assert_eq!(
        csv.header,
        ["t", "pi_1", "pi_2", "pi_3", "energy", "casimir_1", "supplied_power"]
    );
    assert_eq!(csv.rows.len(), 10_001);
    assert_eq!(csv.rows[0][0], 0.0);

    let summary: RunSummary = serde_json::from_str(
        &fs::read_to_string(dir.path().join("rigid_body_free_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary.n_samples, csv.rows.len());
    assert_eq!(summary.final_time, 10.0);
    assert_eq!(summary.state_columns, ["pi_1", "pi_2", "pi_3"]);

    let last = csv.rows.last().unwrap();
    for (i, v) in summary.final_state.iter().enumerate() {
        assert_eq!(last[1 + i], *v, "state column {i} round-trips exactly");
    }

    for d in &summary.diagnostics {
        let series = csv.column(&d.name);
        let first = series[0];
        let min = series.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let drift = series.iter().fold(0.0f64, |m, v| m.max((v - first).abs()));
        assert_eq!(d.first, first, "{}", d.name);
        assert_eq!(d.min, min, "{}", d.name);
        assert_eq!(d.max, max, "{}", d.name);
        assert_eq!(d.drift, drift, "{}", d.name);
    }
}

#[test]
fn summary_echoes_the_parsed_config() {
    let dir = tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let path = scenario("heavy_top_free.json");
    let run = lpsim(&["simulate", &path, "--out-dir", &out_dir, "--quiet"]);
    assert_eq!(exit_code(&run), 0, "stderr: {}", stderr(&run));
    assert!(stdout(&run).is_empty(), "quiet run prints nothing");

    let original = ScenarioConfig::load(path.as_ref()).unwrap();
    let summary: RunSummary = serde_json::from_str(
        &fs::read_to_string(dir.path().join("heavy_top_free_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary.config, original);
}

#[test]
fn csv_cells_carry_seventeen_significant_digits() {
    let dir = tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let run = lpsim(&["simulate", &scenario("rigid_body_free.json"), "--out-dir", &out_dir, "--quiet"]);
    assert_eq!(exit_code(&run), 0);
    let text = fs::read_to_string(dir.path().join("rigid_body_free.csv")).unwrap();
    let row = text.lines().nth(2).unwrap();
    for cell in row.split(',') {
        let mantissa = cell.split('e').next().unwrap();
        let digits: usize = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
        assert_eq!(digits, 17, "cell {cell} carries 17 significant digits");
    }
}

#[test]
fn decimation_thins_csv_but_not_the_summary() {
    let dir = tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(scenario_dir().join("rigid_body_free.json")).unwrap(),
    )
    .unwrap();
    cfg["name"] = "decimated".into();
    cfg["outputs"] = serde_json::json!({ "csv": true, "summary": true, "every": 10 });
    let path = dir.path().join("decimated.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let out_dir = dir.path().display().to_string();
    let run = lpsim(&["simulate", path.to_str().unwrap(), "--out-dir", &out_dir, "--quiet"]);
    assert_eq!(exit_code(&run), 0, "stderr: {}", stderr(&run));
    let csv = read_csv(&dir.path().join("decimated.csv"));
    assert_eq!(csv.rows.len(), 1_001);
    let summary: RunSummary = serde_json::from_str(
        &fs::read_to_string(dir.path().join("decimated_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary.n_samples, 10_001);
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ \"name\": ").unwrap();
    let run = lpsim(&["simulate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&run), 2);
    assert!(stderr(&run).contains("parse error"), "stderr: {}", stderr(&run));
    assert!(stderr(&run).contains("line"), "position reported: {}", stderr(&run));
}

#[test]
fn unknown_system_kind_exits_2_and_names_admissible_values() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("bad_kind.json");
    fs::write(
        &path,
        r#"{
            "name": "bad_kind",
            "system": { "kind": "pendulum", "inertia": [1.0, 2.0, 3.0] },
            "integrator": { "method": "rk4", "step": 1e-3, "t_final": 1.0 },
            "initial_state": { "pi": [1.0, 1.0, 1.0] }
        }"#,
    )
    .unwrap();
    let run = lpsim(&["simulate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&run), 2);
    let err = stderr(&run);
    assert!(err.contains("pendulum") && err.contains("heavy_top_rotors"), "stderr: {err}");
}

#[test]
fn missing_required_field_exits_2() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("missing.json");
    fs::write(
        &path,
        r#"{
            "name": "missing",
            "system": { "kind": "heavy_top", "inertia": [1.0, 1.5, 2.0], "mgh": 2.0 },
            "integrator": { "method": "rk4", "step": 1e-3, "t_final": 1.0 },
            "initial_state": { "pi": [1.0, 1.0, 1.0], "gamma": [0.0, 0.0, 1.0] }
        }"#,
    )
    .unwrap();
    let run = lpsim(&["simulate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&run), 2);
    assert!(stderr(&run).contains("chi"), "stderr: {}", stderr(&run));
}

#[test]
fn unused_field_exits_2() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("extra.json");
    fs::write(
        &path,
        r#"{
            "name": "extra",
            "system": { "kind": "rigid_body", "inertia": [1.0, 2.0, 3.0], "mgh": 2.0 },
            "integrator": { "method": "rk4", "step": 1e-3, "t_final": 1.0 },
            "initial_state": { "pi": [1.0, 1.0, 1.0] }
        }"#,
    )
    .unwrap();
    let run = lpsim(&["simulate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&run), 2);
    assert!(stderr(&run).contains("mgh"), "stderr: {}", stderr(&run));
}

#[test]
fn unknown_json_key_exits_2() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("typo.json");
    fs::write(
        &path,
        r#"{
            "name": "typo",
            "system": { "kind": "rigid_body", "inertia": [1.0, 2.0, 3.0] },
            "integrater": { "method": "rk4", "step": 1e-3, "t_final": 1.0 },
            "initial_state": { "pi": [1.0, 1.0, 1.0] }
        }"#,
    )
    .unwrap();
    let run = lpsim(&["simulate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&run), 2);
    assert!(stderr(&run).contains("integrater"), "stderr: {}", stderr(&run));
}

#[test]
fn inadmissible_law_exits_2() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("inadmissible.json");
    fs::write(
        &path,
        r#"{
            "name": "inadmissible",
            "system": { "kind": "rigid_body", "inertia": [1.0, 2.0, 3.0] },
            "control": { "law": "torque_p", "p": [0.1, 0.2, 0.3] },
            "integrator": { "method": "rk4", "step": 1e-3, "t_final": 1.0 },
            "initial_state": { "pi": [1.0, 1.0, 1.0] }
        }"#,
    )
    .unwrap();
    let run = lpsim(&["simulate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&run), 2);
    assert!(
        stderr(&run).contains("does not drive"),
        "stderr: {}",
        stderr(&run)
    );
}

#[test]
fn numerical_blowup_exits_3() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("blowup.json");
    fs::write(
        &path,
        r#"{
            "name": "blowup",
            "system": { "kind": "rigid_body", "inertia": [1.0, 2.0, 3.0] },
            "integrator": { "method": "rk4", "step": 1e-3, "t_final": 1.0 },
            "initial_state": { "pi": [1e308, 1e308, 0.0] }
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().display().to_string();
    let run = lpsim(&["simulate", path.to_str().unwrap(), "--out-dir", &out_dir]);
    assert_eq!(exit_code(&run), 3, "stderr: {}", stderr(&run));
    assert!(stderr(&run).contains("numerical"), "stderr: {}", stderr(&run));
}

#[test]
fn failing_check_exits_4() {
    let dir = tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(scenario_dir().join("equivalence_rb_rotor.json")).unwrap(),
    )
    .unwrap();
    cfg["name"] = "perturbed".into();
    cfg["perturb"] = 1e-3.into();
    let path = dir.path().join("perturbed.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out_dir = dir.path().display().to_string();
    let run = lpsim(&["equivalence", path.to_str().unwrap(), "--out-dir", &out_dir]);
    assert_eq!(exit_code(&run), 4, "stderr: {}", stderr(&run));
    assert!(stdout(&run).contains("[FAIL]"), "stdout: {}", stdout(&run));
    let reports: Vec<liepoisson::CheckReport> = serde_json::from_str(
        &fs::read_to_string(dir.path().join("perturbed_equivalence.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(reports.len(), 1);
    assert!(!reports[0].passed);
}

#[test]
fn impossible_balance_tolerance_exits_4() {
    let dir = tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(scenario_dir().join("port_rotor_stage.json")).unwrap(),
    )
    .unwrap();
    cfg["name"] = "strict_port".into();
    cfg["balance"]["tolerance"] = 1e-30.into();
    let path = dir.path().join("strict_port.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out_dir = dir.path().display().to_string();
    let run = lpsim(&["port", path.to_str().unwrap(), "--out-dir", &out_dir]);
    assert_eq!(exit_code(&run), 4, "stderr: {}", stderr(&run));
}

#[test]
fn verify_writes_a_full_report() {
    let dir = tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let run = lpsim(&["verify", "--out-dir", &out_dir, "--quiet"]);
    assert_eq!(exit_code(&run), 0, "stderr: {}", stderr(&run));
    let reports: Vec<liepoisson::CheckReport> = serde_json::from_str(
        &fs::read_to_string(dir.path().join("verify_report.json")).unwrap(),
    )
    .unwrap();
    assert!(reports.len() >= 40, "suite has {} reports", reports.len());
    assert!(reports.iter().all(|r| r.passed));
    let names: Vec<_> = reports.iter().map(|r| r.name.as_str()).collect();
    for expected in [
        "bracket_so3_dual_jacobi",
        "derivation_chain_heavy_top_rotors",
        "equivalence_rotor_vs_heavy_top",
        "rotor_first_integral",
        "port_balance_rotor_gain",
        "rk4_order",
    ] {
        assert!(names.contains(&expected), "missing {expected}");
    }
}

#[test]
fn out_dir_is_created_when_missing() {
    let dir = tempdir().unwrap();
    let nested = dir.path().join("a/b/c");
    let run = lpsim(&[
        "simulate",
        &scenario("rigid_body_splitting.json"),
        "--out-dir",
        nested.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(exit_code(&run), 0, "stderr: {}", stderr(&run));
    assert!(nested.join("rigid_body_splitting.csv").is_file());
}
