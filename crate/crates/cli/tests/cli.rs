use std::path::Path;
use std::process::{Command, Output};

fn aqw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqw")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!("experiment = variance_vs_t\nmodel = broken_line\nf = 0.5\nt_max = 6\noutput = {}\n", out.display()),
    );
    let o = aqw(&["run", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("variance_vs_t_broken_line_f0.5.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,var_x,var_y,engine");
    assert_eq!(lines.len(), 8);
    assert!(lines[7].ends_with(",exact"));
    let manifest = std::fs::read_to_string(out.join("variance_vs_t_broken_line.manifest.txt")).unwrap();
    assert!(manifest.contains("resolved_engine = exact"), "{manifest}");
}

#[test]
fn seeded_trajectory_runs_repeat_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "experiment = distribution\nmodel = coin_measure\nf = 0.4\nt_max = 10\nengine = trajectory\nn_traj = 400\n",
    );
    let read = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = aqw(&["--seed", seed, "run", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out.join("distribution_coin_measure_f0.4.csv")).unwrap()
    };
    let (a, b, c) = (read("a", "7"), read("b", "7"), read("c", "8"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "experiment = variance_vs_t\nmodel = broken_line\nf = 0.3\nt_max = 8\nengine = trajectory\nn_traj = 500\n",
    );
    let read = |sub: &str, threads: &str| {
        let out = dir.path().join(sub);
        let o = aqw(&["--threads", threads, "run", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out.join("variance_vs_t_broken_line_f0.3.csv")).unwrap()
    };
    assert_eq!(read("one", "1"), read("three", "3"));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = distribution\nmodel = broken_line\nwidth = 3\n");
    let o = aqw(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("width"), "{err}");
}

#[test]
fn invalid_values_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = distribution\nmodel = broken_line\nf = 1.5\nt_max = 4\n");
    let o = aqw(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("\"f\""), "{}", stderr(&o));
}

#[test]
fn exact_engine_refuses_long_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = distribution\nmodel = broken_line\nf = 0.5\nt_max = 40\nengine = exact\n");
    let o = aqw(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t_max"), "{}", stderr(&o));
}

#[test]
fn unknown_preset_is_rejected() {
    let o = aqw(&["preset", "fig9", "--out", "unused"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("fig9"));
}
