use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wsaw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsaw"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn enumerate_free_walk_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = wsaw(&["enumerate", "--dim", "5", "--beta", "0", "--n", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("enumerate.csv"));
    assert_eq!(rows[3][0], "3");
    assert_eq!(rows[3][1], "1000");
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn lace_check_residual_is_tiny() {
    let dir = tempfile::tempdir().unwrap();
    let out = wsaw(&["lace-check", "--dim", "2", "--n", "6", "--beta", "0.3"], dir.path());
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("lace_check.csv"));
    assert_eq!(rows.len(), 7);
    for row in rows {
        assert!(row[2].parse::<f64>().unwrap() <= 1e-10);
    }
}

#[test]
fn same_seed_gives_identical_tables() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["perm", "--dim", "3", "--beta", "0.4", "--n", "30", "--tours", "300", "--seed", "5"];
    assert!(wsaw(&args, a.path()).status.success());
    assert!(wsaw(&args, b.path()).status.success());
    assert_eq!(fs::read(a.path().join("perm.csv")).unwrap(), fs::read(b.path().join("perm.csv")).unwrap());
}

#[test]
fn manifest_round_trip_reproduces_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = wsaw(&["degenerate", "--n", "10", "--r", "5,9", "--samples", "200", "--seed", "3"], a.path());
    assert!(out.status.success());
    let manifest = a.path().join("manifest.json");
    let out = Command::new(env!("CARGO_BIN_EXE_wsaw"))
        .args(["run", "--config"])
        .arg(&manifest)
        .arg("--out")
        .arg(b.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(a.path().join("degenerate.csv")).unwrap(),
        fs::read(b.path().join("degenerate.csv")).unwrap()
    );
}

#[test]
fn invalid_config_exits_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = wsaw(&["perm", "--beta", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[invalid-config]"));
    let out = wsaw(&["plateau", "--r", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_exceeded_has_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = wsaw(&["enumerate", "--dim", "5", "--n", "11"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error[budget-exceeded]"));
}

#[test]
fn sampling_commands_run_on_small_budget() {
    for (cmd, n, file) in [
        ("metropolis", "20", "metropolis.csv"),
        ("tightness", "20", "tightness.csv"),
        ("fdd", "20", "fdd.csv"),
        ("dilute-ratio", "5", "dilute_ratio.csv"),
        ("plateau", "4", "plateau.csv"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = wsaw(&[cmd, "--n", n, "--samples", "500"], dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!csv_rows(&dir.path().join(file)).is_empty(), "{cmd}");
    }
}
