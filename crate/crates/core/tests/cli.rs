//! End-to-end runs of the `supercell` binary.

use std::path::Path;
use std::process::{Command, Output};

use supercell::io::{check_plot_data, read_json, RunManifest};
use supercell::{ServingPlan, TrialReport};

fn supercell(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supercell"))
        .args(args)
        .current_dir(dir)
        .env_remove("SUPERCELL_SEED")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_twice_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = stdout(&supercell(&["run", "--seed", "42", "--trial", "3"], tmp.path()));
    let b = stdout(&supercell(&["run", "--seed", "42", "--trial", "3"], tmp.path()));
    assert_eq!(a, b);
    let report: TrialReport = serde_json::from_str(&a).unwrap();
    assert_eq!(report.trial_index, 3);
    assert!(!report.rejected);
}

#[test]
fn seed_env_fallback() {
    let tmp = tempfile::tempdir().unwrap();
    let flag = stdout(&supercell(&["run", "--seed", "9"], tmp.path()));
    let env = Command::new(env!("CARGO_BIN_EXE_supercell"))
        .arg("run")
        .env("SUPERCELL_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flag, stdout(&env));
}

#[test]
fn run_out_writes_artifacts_and_plan_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("trial");
    stdout(&supercell(&["run", "--users", "30", "--out", out.to_str().unwrap()], tmp.path()));
    for f in ["trial.json", "energy.csv", "topology.json", "plan.json", "links.csv", "snapshot.json", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let manifest: RunManifest = read_json(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.outputs.len(), 6);
    assert!(manifest.timestamp.is_none());

    let replanned = stdout(&supercell(
        &[
            "plan",
            "--topology",
            out.join("topology.json").to_str().unwrap(),
            "--snapshot",
            out.join("snapshot.json").to_str().unwrap(),
        ],
        tmp.path(),
    ));
    let original: ServingPlan = read_json(&out.join("plan.json")).unwrap();
    assert_eq!(serde_json::from_str::<ServingPlan>(&replanned).unwrap(), original);
}

#[test]
fn sweep_writes_plot_ready_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let text = stdout(&supercell(&["sweep", "--users", "20,40", "--trials", "5", "--out", "o"], tmp.path()));
    assert!(text.contains("supercell"));
    let rows = check_plot_data(&tmp.path().join("o/sweep.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.trials == 5));
}

#[test]
fn zero_trials_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = supercell(&["sweep", "--trials", "0"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn validate_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good.toml");
    std::fs::write(&good, "phantom_count = 4\nusers_per_cell = 3\n").unwrap();
    let text = stdout(&supercell(&["validate-config", "--config", good.to_str().unwrap()], tmp.path()));
    assert!(text.contains("phantom_count = 4"));

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "phantom_cuont = 4\n").unwrap();
    let out = supercell(&["validate-config", "--config", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phantom_cuont"));
}

#[test]
fn shipped_default_config_matches_builtin_defaults() {
    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/config/default.toml");
    let cfg = supercell::io::load_config(Path::new(shipped)).unwrap();
    assert_eq!(cfg, supercell::SimConfig::default());
}

#[test]
fn oracle_reports_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let text = stdout(&supercell(&["oracle", "--trials", "20", "--users", "4"], tmp.path()));
    assert!(text.contains("mean greedy/optimal"));
}
