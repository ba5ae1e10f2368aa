use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn condcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condcov"))
        .args(args)
        .env_remove("CONDCOV_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(condcov(&["--help"]).status.code(), Some(0));
    let v = condcov(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(condcov(&[]).status.code(), Some(2));
    assert_eq!(condcov(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        condcov(&["adversary", "--method", "bogus", "--n", "100"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(condcov(&["bounds"]).status.code(), Some(2));
    assert_eq!(condcov(&["bounds", "--split"]).status.code(), Some(2));
    assert_eq!(
        condcov(&["bounds", "--split", "--n1", "100", "--alpha", "1.5"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad_folds = condcov(&[
        "simulate",
        "--preset",
        "smoke",
        "--folds",
        "7",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(bad_folds.status.code(), Some(2), "{}", stderr(&bad_folds));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    let bad_key = condcov(&[
        "simulate",
        "--preset",
        "smoke",
        "--set",
        "colour=blue",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(bad_key.status.code(), Some(2));
}

#[test]
fn missing_output_directory_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let o = condcov(&["simulate", "--preset", "smoke", "--out-dir", path(&missing)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!missing.exists());
    let o = condcov(&[
        "simulate",
        "--from-manifest",
        path(&dir.path().join("absent.json")),
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bounds_table_and_json() {
    let o = condcov(&[
        "bounds", "--split", "--alpha", "0.1", "--delta", "0.05", "--n1", "250",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0.1774"), "{}", stdout(&o));

    let o = condcov(&[
        "bounds", "--cvplus", "--alpha", "0.1", "--delta", "0.05", "--K", "20", "--m", "25",
    ]);
    assert!(stdout(&o).contains("0.892"));
    assert!(stdout(&o).contains("VACUOUS-NEAR-1"));

    let o = condcov(&["bounds", "--floor", "--alpha", "0.1", "--n", "500"]);
    let out = stdout(&o);
    assert!(out.contains("-0.5"), "{out}");
    assert!(out.contains("VACUOUS"));

    let o = condcov(&[
        "bounds",
        "--split",
        "--corrected",
        "--floor",
        "--n1",
        "250",
        "--n",
        "50000",
        "--delta",
        "0.05",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let entries: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(entries.len(), 3);
    let value = |name: &str| {
        entries
            .iter()
            .find(|l| l["bound"] == name)
            .and_then(|l| l["value"].as_f64())
            .unwrap()
    };
    assert!((value("split") - 0.177405).abs() < 1e-6);
    assert!((value("corrected") - 0.022595).abs() < 1e-6);
    assert!((value("floor") - 0.0117377).abs() < 1e-6);

    let o = condcov(&["bounds", "--corrected", "--n1", "10", "--delta", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("INFEASIBLE"));
}

#[test]
fn simulate_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = condcov(&[
        "simulate",
        "--preset",
        "smoke",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["trials.csv", "summary.csv", "summary.json", "manifest.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(
        summary.lines().next().unwrap(),
        "method,d,mean,median,max,frac_gt_alpha,frac_gt_0.2,frac_gt_0.99"
    );
    assert_eq!(summary.lines().count(), 5);
    let trials = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 4 * 20);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "complete");
    assert_eq!(manifest["config"]["n"], 40);
    assert!(manifest["finished_unix"].as_f64().is_some());
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = condcov(&[
        "simulate",
        "--preset",
        "smoke",
        "--dims",
        "5,20",
        "--seed",
        "99",
        "--workers",
        "3",
        "--out-dir",
        path(first.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = first.path().join("manifest.json");
    let o = condcov(&[
        "simulate",
        "--from-manifest",
        path(&manifest),
        "--workers",
        "1",
        "--out-dir",
        path(second.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["trials.csv", "summary.csv", "summary.json"] {
        let a = fs::read(first.path().join(f)).unwrap();
        let b = fs::read(second.path().join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn config_file_flags_and_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# small run\nmode = ridge_sim\nn = 20\nn_test = 50\nd = 3\ntrials = 4\nK = 4\n\
         methods = split, cv+\nlambda = 0.01\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_condcov"))
        .args(["simulate", "--config", path(&cfg), "--trials", "3"])
        .env("CONDCOV_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["trials"], 3);
    assert_eq!(manifest["config"]["folds"], 4);
    let trials = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 3);
}

#[test]
fn adversary_small_run_warns_when_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let o = condcov(&[
        "adversary",
        "--method",
        "full",
        "--n",
        "100",
        "--trials",
        "20",
        "--n-test",
        "50",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("M1 = 0"), "{err}");
    assert!(err.contains("VACUOUS"), "{err}");
    let trials = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 21);
}
