//! The `frontlab` binary on small configs: exit codes, config errors,
//! run-directory contents and reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use frontlab::runner::{read_field_dump, sha256_hex};

const WAVE: &str = r#"
pipeline = "wave"
name = "wave-smoke"

[wave]
half_width = 40.0
step = 0.005
tail_window = [8.0, 12.0]
residual_max = 1e-6
tail_deviation_max = 1e-2
runtime_max = 10.0
"#;

const RUN1D: &str = r#"
pipeline = "run1d"
name = "run1d-smoke"

[run1d]
datum = { shape = "step", at = 0.0 }
fit_window = [2.0, 10.0]
slope_range = [-1.65, -1.35]
drift_times = [5.0, 10.0]
drift_max = 0.1
shape_time = 10.0
shape_max = 0.02

[run1d.steps]
t_end = 10.0
x_max = 30.0
dump_times = [10.0]
"#;

const RUN2D: &str = r#"
pipeline = "run2d"
name = "run2d-smoke"

[run2d]
scenario = { family = "heaviside_trapped", x1 = 2.0, x2 = -2.0, notch = { position = 2.0, half_width = 4.0 } }
y_min = 0.0
y_max = 12.0
y_cells = 12

[run2d.steps]
t_end = 4.0
x_min = -20.0
x_max = 20.0
per_decade = 8
dump_times = [4.0]
"#;

fn frontlab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_frontlab"));
    cmd.args(args).env_remove("FRONTLAB_THREADS");
    if let Some(n) = threads {
        cmd.env("FRONTLAB_THREADS", n);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, file: &str, text: &str) -> PathBuf {
    let path = dir.join(file);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(sub: &str, config: &Path, out: &Path) -> Output {
    frontlab(&[sub, config.to_str().unwrap(), "--out", out.to_str().unwrap()], None)
}

#[test]
fn passing_wave_exits_zero_and_records_everything() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "wave.toml", WAVE);
    let out = run("wave", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS wave_residual_rms"), "{stdout}");

    let run_dir = dir.path().join("wave-smoke");
    for f in [
        "record.json",
        "config.toml",
        "wave.csv",
        "summary.json",
        "gates.csv",
        "plot.gp",
    ] {
        assert!(run_dir.join(f).is_file(), "{f} missing");
    }
    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("record.json")).unwrap()).unwrap();
    let snapshot = std::fs::read(run_dir.join("config.toml")).unwrap();
    assert_eq!(record["provenance"]["config_hash"], sha256_hex(&snapshot));
}

#[test]
fn failed_gate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "wave.toml",
        &WAVE.replace("residual_max = 1e-6", "residual_max = 1e-14"),
    );
    let out = run("wave", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL wave_residual_rms"));
}

#[test]
fn unknown_key_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "wave.toml", &WAVE.replace("step = 0.005", "stepp = 0.005"));
    let out = run("wave", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stepp"));
}

#[test]
fn invalid_value_exits_two_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "wave.toml", &WAVE.replace("step = 0.005", "step = -0.005"));
    let out = run("wave", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wave.step"));
}

#[test]
fn merge_analysis_needs_a_two_limit_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let text = RUN2D.replace(
        "y_cells = 12",
        "y_cells = 12\nanalysis = { kind = \"merge\", time = 4.0, window = [2.0, 4.0] }",
    );
    let cfg = write_config(dir.path(), "run2d.toml", &text);
    let out = run("run2d", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run2d.analysis"));
}

#[test]
fn periodic_analysis_on_a_reflecting_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = RUN2D.replace(
        "y_cells = 12",
        "y_cells = 12\nanalysis = { kind = \"periodic\", time = 4.0, compare_time = 2.0 }",
    );
    let cfg = write_config(dir.path(), "run2d.toml", &text);
    let out = run("run2d", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run2d.y_boundary"));
}

#[test]
fn pipeline_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "wave.toml", WAVE);
    let out = run("heat", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`wave` pipeline"));
}

#[test]
fn missing_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("wave", &dir.path().join("absent.toml"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run1d.toml", RUN1D);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run("run1d", &cfg, &a);
    run("run1d", &cfg, &b);
    for f in ["front.csv", "bramson_fit.csv", "field_0000.f64", "config.toml"] {
        let read = |d: &Path| std::fs::read(d.join("run1d-smoke").join(f)).unwrap();
        assert_eq!(read(&a), read(&b), "{f} differs");
    }
}

#[test]
fn thread_count_does_not_change_the_2d_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run2d.toml", RUN2D);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let one = frontlab(
        &["run2d", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()],
        Some("1"),
    );
    let three = frontlab(
        &["run2d", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()],
        Some("3"),
    );
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(three.status.code(), Some(0));
    for f in ["front.csv", "sandwich.csv", "field_0000.f64"] {
        let read = |d: &Path| std::fs::read(d.join("run2d-smoke").join(f)).unwrap();
        assert_eq!(read(&a), read(&b), "{f} differs");
    }
    let field = read_field_dump(&a.join("run2d-smoke/field_0000.f64")).unwrap();
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("run2d-smoke/field_0000.json")).unwrap()).unwrap();
    let shape: Vec<usize> = serde_json::from_value(side["shape"].clone()).unwrap();
    assert_eq!(field.len(), shape[0] * shape[1]);
    assert!(field.iter().all(|u| (0.0..=1.0).contains(u)));
}

#[test]
fn suite_runs_members_and_reports_them_together() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "wave.toml", WAVE);
    write_config(
        dir.path(),
        "bad.toml",
        &WAVE
            .replace("wave-smoke", "wave-strict")
            .replace("tail_deviation_max = 1e-2", "tail_deviation_max = 1e-9"),
    );
    let cfg = write_config(
        dir.path(),
        "suite.toml",
        "pipeline = \"suite\"\nname = \"smoke\"\n\n[suite]\nmembers = [\"wave.toml\", \"bad.toml\"]\n",
    );
    let out = run("suite", &cfg, &dir.path().join("runs"));
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("runs/smoke/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["gates"], 6);
    assert_eq!(summary["failed"], 1);
    assert!(dir.path().join("runs/smoke/wave-strict/record.json").is_file());
}
