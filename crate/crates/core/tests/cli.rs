use std::path::Path;
use std::process::{Command, Output};

fn orvar(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orvar"))
        .current_dir(dir)
        .env_remove("ORVAR_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    names
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = orvar(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verify"));
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(orvar(dir.path(), &["verify", "--surface", "klein"]).status.code(), Some(1));
    assert_eq!(orvar(dir.path(), &["scenario", "cube"]).status.code(), Some(1));
    let out = orvar(dir.path(), &["scenario", "double-plane", "--resolutions", "8,4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("increasing"), "{}", stderr(&out));
}

#[test]
fn cmc_sphere_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = orvar(
        dir.path(),
        &["--out-dir", "out", "verify", "--surface", "sphere", "--radius", "2", "--g", "1", "--orientation", "inner"],
    );
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS [2-cmc-prescription]"), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(!files(&dir.path().join("out")).is_empty());
}

#[test]
fn failed_threshold_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("strict.toml"), "[thresholds]\nresidual = 1e-30\n").unwrap();
    let out = orvar(
        dir.path(),
        &["--config", "strict.toml", "verify", "--surface", "sphere", "--resolutions", "8,16", "--grid", "3"],
    );
    assert_eq!(out.status.code(), Some(2), "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[output]\ncolour = true\n").unwrap();
    let out = orvar(dir.path(), &["--config", "bad.toml", "scenario", "double-plane"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "x1,x2,x3,v1,v2,v3,mass\n0,0,0,0,0,1,1\n0,0,oops,0,0,1,1\n").unwrap();
    let out = orvar(dir.path(), &["recover", "--varifold", "bad.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn double_plane_scenario_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = orvar(dir.path(), &["--out-dir", sub, "--no-timestamp", "scenario", "double-plane"]);
        assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
        dir.path().join(sub)
    };
    let (a, b) = (run("a"), run("b"));
    let names = files(&a);
    assert_eq!(names, files(&b));
    assert!(names.iter().any(|n| n.starts_with("double-plane-") && n.ends_with(".json")));
    for name in names {
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name}");
    }
}

#[test]
fn timestamp_is_recorded_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = orvar(dir.path(), &["--out-dir", "out", "scenario", "double-plane"]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    let json = files(&dir.path().join("out")).into_iter().find(|n| n.ends_with(".json")).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out").join(json)).unwrap()).unwrap();
    assert!(report["timestamp"].as_u64().is_some());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_orvar"))
        .current_dir(dir.path())
        .env("ORVAR_OUT_DIR", "from-env")
        .args(["scenario", "double-plane"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    assert!(!files(&dir.path().join("from-env")).is_empty());
}

#[test]
fn recover_and_distance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("x1,x2,x3,v1,v2,v3,mass\n");
    for i in 0..8 {
        for j in 0..8 {
            let (x, y) = (-0.875 + 0.25 * i as f64, -0.875 + 0.25 * j as f64);
            csv.push_str(&format!("{x},{y},0,0,0,1,0.0625\n"));
        }
    }
    std::fs::write(dir.path().join("plane.csv"), &csv).unwrap();
    let out = orvar(dir.path(), &["--out-dir", "out", "recover", "--varifold", "plane.csv"]);
    assert!(matches!(out.status.code(), Some(0 | 2)), "{}{}", stdout(&out), stderr(&out));
    assert!(files(&dir.path().join("out")).iter().any(|n| n.ends_with("field.csv")));

    let out = orvar(dir.path(), &["--out-dir", "out", "distance", "--a", "plane.csv", "--b", "plane.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("bl distance (dictionary lower bound): 0e0"), "{}", stdout(&out));
}
