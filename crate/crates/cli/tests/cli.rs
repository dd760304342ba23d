use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use passfeas_cli::files::DATA_DIR_ENV;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn cmd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_passfeas"));
    c.env_remove(DATA_DIR_ENV);
    c
}

fn passfeas(args: &[&str]) -> Output {
    cmd().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn preset() -> String {
    data("reference_55mph.json").to_str().unwrap().to_owned()
}

/// Copies the 55 mph preset into `dir` with one scenario field replaced.
fn edited_scenario(dir: &Path, field: &str, value: Value) -> String {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(data("reference_55mph.json")).unwrap()).unwrap();
    v["pass_scenario"][field] = value;
    let path = dir.join("scenario.json");
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn bounds_prints_two_decimal_summary() {
    let out = passfeas(&["bounds", &preset()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("min_pass_time   12.17 s"), "{text}");
    assert!(text.contains("min_comm_range  712.63 m"), "{text}");
}

#[test]
fn zero_acceleration_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = edited_scenario(dir.path(), "max_accel", 0.0.into());
    for sub in ["bounds", "run"] {
        let out = passfeas(&[sub, &path]);
        assert_eq!(out.status.code(), Some(2), "{sub}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("max_accel"));
    }
}

#[test]
fn reaction_longer_than_gap_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = edited_scenario(dir.path(), "reaction_time", 5.0.into());
    assert_eq!(passfeas(&["bounds", &path]).status.code(), Some(3));
}

#[test]
fn missing_scenario_is_an_io_error() {
    assert_eq!(passfeas(&["bounds", "/nonexistent/scenario.json"]).status.code(), Some(4));
}

#[test]
fn short_duration_limit_exits_five() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&fs::read_to_string(data("reference_55mph.json")).unwrap()).unwrap();
    v["sim"]["duration_limit"] = 5.0.into();
    let path = dir.path().join("s.json");
    fs::write(&path, v.to_string()).unwrap();
    assert_eq!(passfeas(&["run", path.to_str().unwrap()]).status.code(), Some(5));
}

#[test]
fn run_summaries_by_placement() {
    let out = passfeas(&["run", "--json", &preset()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["final_advisory"], "SafeToPass");
    assert!((v["connectivity_s"].as_f64().unwrap() - 40.67).abs() <= 0.1);

    let out = passfeas(&["run", &preset(), "--channel", "inside_channel.json"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("DoNotPass(RangeDeficit)"));
}

#[test]
fn csv_only_written_when_asked_and_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd().current_dir(dir.path()).args(["run", &preset()]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(passfeas(&["run", &preset(), "--csv", p.to_str().unwrap()]).status.success());
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_s,sender,receiver,distance_m,los,delivered,via_relay"));
    assert_eq!(lines.next(), Some("0,host,oncoming,1500,true,false,false"));
}

#[test]
fn csv_to_unwritable_path_is_io_error() {
    let out = passfeas(&["run", &preset(), "--csv", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn seed_does_not_change_deterministic_runs() {
    let a = passfeas(&["run", "--json", &preset(), "--seed", "1"]);
    let b = passfeas(&["run", "--json", &preset(), "--seed", "99"]);
    assert_eq!(a.stdout, b.stdout);
}

fn sweep_rows(args: &[&str]) -> Vec<Vec<String>> {
    let out = passfeas(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,min_time_s,min_range_m,verdict,connectivity_s"));
    lines.map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn inside_speed_sweep_is_infeasible_throughout() {
    let rows = sweep_rows(&[
        "sweep",
        &preset(),
        "--channel",
        "inside_channel.json",
        "--param",
        "pass_scenario.v1",
        "--values",
        "55mph,70mph",
    ]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "24.5872");
    assert_eq!(rows[1][0], "31.2928");
    assert!(rows.iter().all(|r| r[3].starts_with("Infeasible")), "{rows:?}");
}

#[test]
fn safety_margin_sweep_shifts_range_by_step() {
    let rows = sweep_rows(&["sweep", &preset(), "--param", "pass_scenario.safety_margin", "--range", "0:80:40"]);
    let ranges: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(ranges.len(), 3);
    for w in ranges.windows(2) {
        assert!((w[1] - w[0] - 40.0).abs() < 1e-9);
    }
    assert!(rows.iter().all(|r| r[1] == rows[0][1]));
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let rows = sweep_rows(&[
        "sweep",
        &preset(),
        "--param",
        "pass_scenario.headway",
        "--values",
        "24.6",
        "--out",
        out.to_str().unwrap(),
    ]);
    let written = fs::read_to_string(&out).unwrap();
    assert_eq!(written.lines().count(), 2);
    let run: Value = serde_json::from_slice(&passfeas(&["run", "--json", &preset()]).stdout).unwrap();
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), run["connectivity_s"].as_f64().unwrap());
    assert_eq!(rows[0][3], "SafePassFeasible");
}

#[test]
fn invalid_sweep_point_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let status = passfeas(&[
        "sweep",
        &preset(),
        "--param",
        "pass_scenario.max_accel",
        "--values",
        "0.67,0",
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert_eq!(status.code(), Some(2));
    assert!(!out.exists());
    let bare = passfeas(&["sweep", &preset(), "--param", "pass_scenario.v1", "--values", "55"]);
    assert_eq!(bare.status.code(), Some(2));
}

#[test]
fn repro_passes_on_shipped_presets() {
    let out = passfeas(&["repro"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches("PASS").count(), 10);

    let out = passfeas(&["repro", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
}

fn copy_presets(dir: &Path) {
    for entry in fs::read_dir(data("")).unwrap() {
        let p = entry.unwrap().path();
        fs::copy(&p, dir.join(p.file_name().unwrap())).unwrap();
    }
}

#[test]
fn repro_flags_corrupted_calibration() {
    let dir = tempfile::tempdir().unwrap();
    copy_presets(dir.path());
    let cal = dir.path().join("calibration.json");
    let text = fs::read_to_string(&cal).unwrap().replace("466", "470");
    fs::write(&cal, text).unwrap();
    let out = cmd().env(DATA_DIR_ENV, dir.path()).arg("repro").output().unwrap();
    assert_eq!(out.status.code(), Some(6));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("inside_vehicle Forward @ 55 mph"), "{err}");
}

#[test]
fn repro_flags_missing_preset() {
    let dir = tempfile::tempdir().unwrap();
    copy_presets(dir.path());
    fs::remove_file(dir.path().join("reference_55mph.json")).unwrap();
    let out = cmd().env(DATA_DIR_ENV, dir.path()).arg("repro").output().unwrap();
    assert_eq!(out.status.code(), Some(6));
}
