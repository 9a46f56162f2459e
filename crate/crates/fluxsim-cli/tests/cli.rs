//! End-to-end tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fluxsim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be utf-8")
}

fn exit(out: &Output) -> i32 {
    out.status.code().expect("process should not be signalled")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).expect("config should be writable");
    path
}

const SYNC_5HZ: &str = r#"
[scenario]
name = "smoke"
dt = 1e-4
t_end = 2.0
settle = 0.5

[scenario.estimator]
kind = "voltage-model"

[scenario.profile.voltage]
kind = "sinusoid"
amplitude = 10.0
frequency_hz = 5.0

[scenario.profile.speed]
kind = "constant"
omega = 15.707963267948966
"#;

struct MetricsRow {
    rms: f64,
    drift_slope: f64,
    flux_peak: f64,
    diverged: bool,
}

fn read_metrics(path: &Path) -> MetricsRow {
    let text = std::fs::read_to_string(path).expect("metrics file should exist");
    let row = text.lines().nth(1).expect("metrics file should have a data row");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 6, "metrics row should have six fields: {row}");
    MetricsRow {
        rms: fields[0].parse().unwrap(),
        drift_slope: fields[3].parse().unwrap(),
        flux_peak: fields[4].parse().unwrap(),
        diverged: fields[5].parse().unwrap(),
    }
}

#[test]
fn zero_input_simulation_matches_the_golden_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "zero.toml",
        r#"
[scenario]
name = "zero"
dt = 0.25
t_end = 1.0

[scenario.estimator]
kind = "current-model-simple"

[scenario.profile.voltage]
kind = "step"
amplitude = 0.0

[scenario.profile.speed]
kind = "constant"
omega = 0.0
"#,
    );
    let out_path = dir.path().join("trace.csv");
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));

    let got = std::fs::read(&out_path).unwrap();
    let golden =
        std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/zero_trace.csv"))
            .unwrap();
    assert_eq!(got, golden);
}

#[test]
fn simulate_writes_one_row_per_time_step_plus_the_initial_sample() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.toml", SYNC_5HZ);
    let out_path = dir.path().join("trace.csv");
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));

    let text = std::fs::read_to_string(&out_path).unwrap();
    // 2.0 / 1e-4 steps, one sample before the first and one after the last.
    assert_eq!(text.lines().count(), 20_002);
    assert!(text.starts_with("t,usx,usy,isx,isy,irx,iry,omega,psi_sx,psi_sy,psi_rx,psi_ry\n"));
}

#[test]
fn simulate_without_an_output_path_fails_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.toml", SYNC_5HZ);
    let out = run(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(exit(&out), 2);
    assert!(stderr(&out).contains("--out"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_config_keys_are_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "broken.toml",
        r#"
[scenario]
name = "broken"
t_end = 1.0

[scenario.estimator]
kind = "voltage-model"

[scenario.profile.voltage]
kind = "step"
amplitude = 10.0

[scenario.profile.speed]
kind = "constant"
omega = 0.0
"#,
    );
    let out = run(&["scenario", "--config", config.to_str().unwrap()]);
    assert_eq!(exit(&out), 2);
    assert!(stderr(&out).contains("dt"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_config_keys_are_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "typo.toml",
        &format!("{SYNC_5HZ}\nstele = 0.5\n"),
    );
    let out = run(&["scenario", "--config", config.to_str().unwrap()]);
    assert_eq!(exit(&out), 2);
    assert!(stderr(&out).contains("stele"), "stderr: {}", stderr(&out));
}

#[test]
fn canned_fig3_stays_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["scenario", "fig3", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));
    assert!(dir.path().join("fig3_trace.csv").exists());

    let m = read_metrics(&dir.path().join("fig3_metrics.csv"));
    assert!(!m.diverged);
    assert!(m.rms < 0.1 * m.flux_peak, "rms {} vs peak {}", m.rms, m.flux_peak);
}

#[test]
fn canned_fig2_drifts_away() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["scenario", "fig2", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));

    let m = read_metrics(&dir.path().join("fig2_metrics.csv"));
    assert!(
        m.diverged || m.drift_slope > 0.1,
        "expected runaway, got slope {} diverged {}",
        m.drift_slope,
        m.diverged
    );
}

#[test]
fn canned_fig5_reproduces_the_proportional_inductance_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["scenario", "fig5", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));

    let m = read_metrics(&dir.path().join("fig5_metrics.csv"));
    let relative = m.rms / m.flux_peak;
    assert!((relative - 0.05).abs() < 1e-6, "relative rms {relative}");
}

#[test]
fn unknown_scenario_names_list_the_valid_ones() {
    let out = run(&["scenario", "nope"]);
    assert_eq!(exit(&out), 2);
    let err = stderr(&out);
    for name in ["fig2", "fig3", "fig5", "fig8", "blend5", "blend50"] {
        assert!(err.contains(name), "stderr should list {name}: {err}");
    }
}

#[test]
fn scenario_rejects_both_and_neither_source() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.toml", SYNC_5HZ);

    let both = run(&["scenario", "fig3", "--config", config.to_str().unwrap()]);
    assert_eq!(exit(&both), 2);
    assert!(stderr(&both).contains("not both"));

    let neither = run(&["scenario"]);
    assert_eq!(exit(&neither), 2);
    assert!(stderr(&neither).contains("list-scenarios"));
}

#[test]
fn frequency_sweep_error_falls_with_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "run.toml",
        &format!("{SYNC_5HZ}\n[scenario.mismatch]\nr_s = 1.05\n"),
    );
    let out_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--axis",
        "freq=5,50",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));

    let text = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    let rms: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(rms[1] < rms[0], "rms should fall with frequency: {rms:?}");
}

#[test]
fn sweep_row_matches_an_equivalent_scenario_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = write_config(dir.path(), "base.toml", SYNC_5HZ);
    let mismatched = write_config(
        dir.path(),
        "mismatched.toml",
        &format!("{SYNC_5HZ}\n[scenario.mismatch]\nr_s = 1.05\n"),
    );

    let sweep_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--config",
        base.to_str().unwrap(),
        "--axis",
        "r_se=1.05",
        "--out",
        sweep_path.to_str().unwrap(),
    ]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));

    let out = run(&[
        "scenario",
        "--config",
        mismatched.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));

    let sweep_text = std::fs::read_to_string(&sweep_path).unwrap();
    let sweep_row = sweep_text.lines().nth(1).unwrap();
    let (value, metrics_part) = sweep_row.split_once(',').unwrap();
    assert_eq!(value, "1.05");

    let metrics_text = std::fs::read_to_string(dir.path().join("smoke_metrics.csv")).unwrap();
    assert_eq!(metrics_part, metrics_text.lines().nth(1).unwrap());
}

#[test]
fn matched_estimator_parameters_leave_almost_no_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.toml", SYNC_5HZ);
    let out_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--axis",
        "r_se=1.0",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));

    let text = std::fs::read_to_string(&out_path).unwrap();
    let row = text.lines().nth(1).unwrap();
    let rms: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    let flux_peak: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!(rms < 1e-3 * flux_peak, "rms {rms} flux_peak {flux_peak}");
}

#[test]
fn malformed_axis_specs_fail_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.toml", SYNC_5HZ);
    for axis in ["bogus=1,2", "freq=", "freq", "freq=a,b"] {
        let out = run(&[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--axis",
            axis,
            "--out",
            dir.path().join("x.csv").to_str().unwrap(),
        ]);
        assert_eq!(exit(&out), 2, "axis {axis:?} should be rejected");
    }
}

#[test]
fn equal_seeds_give_byte_identical_noisy_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "noisy.toml",
        &format!("{SYNC_5HZ}\n[scenario.fault]\ncurrent_noise_std = 0.05\n"),
    );
    let run_once = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = run(&[
            "scenario",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--seed",
            "42",
        ]);
        assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));
        std::fs::read(out_dir.join("smoke_trace.csv")).unwrap()
    };
    assert_eq!(run_once("a"), run_once("b"));
}

#[test]
fn an_unstable_time_step_exits_with_the_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "unstable.toml",
        r#"
[scenario]
name = "unstable"
dt = 0.5
t_end = 50.0
settle = 0.0

[scenario.estimator]
kind = "voltage-model"

[scenario.profile.voltage]
kind = "sinusoid"
amplitude = 10.0
frequency_hz = 5.0

[scenario.profile.speed]
kind = "constant"
omega = 15.707963267948966
"#,
    );
    let out = run(&[
        "scenario",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit(&out), 3, "stderr: {}", stderr(&out));
}

#[test]
fn list_scenarios_prints_every_canned_name() {
    let out = run(&["list-scenarios"]);
    assert_eq!(exit(&out), 0);
    let listing = stdout(&out);
    let names: Vec<&str> = listing.lines().map(str::trim).collect();
    assert_eq!(names, ["fig2", "fig3", "fig5", "fig8", "blend5", "blend50"]);
}
