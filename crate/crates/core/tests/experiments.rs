use std::path::Path;

use symloss::config::{ExperimentConfig, ExperimentKind};
use symloss::experiments::{run, run_keywords};
use symloss::pipeline::{run_pipeline, ThresholdChoice};
use symloss::{bundled, Error, LossKind};

fn parse(text: &str) -> symloss::Result<ExperimentConfig> {
    ExperimentConfig::from_toml(text, Path::new("inline.toml"))
}

#[test]
fn single_loss_single_instance_gives_one_row() {
    let cfg = parse(
        "experiment = \"verify_identities\"\nlosses = [\"sigmoid\"]\n[identities]\ninstances = 1\nminimizer_instances = 1\n",
    )
    .unwrap();
    let out = run(&cfg).unwrap();
    assert!(out.passed());
    let csv = out.artifact("residuals.csv").unwrap();
    assert_eq!(csv.lines().count(), 2, "{csv}");
    assert!(csv.lines().nth(1).unwrap().contains(",sigmoid,"));
}

#[test]
fn default_identity_config_passes() {
    let out = run(&bundled::default_config(ExperimentKind::VerifyIdentities).unwrap()).unwrap();
    assert!(out.passed(), "{:?}", out.checks);
    assert_eq!(out.artifact("residuals.csv").unwrap().lines().count(), 1 + 11 * 100);
}

#[test]
fn misspelled_loss_is_reported_with_its_field() {
    let err = parse("experiment = \"verify_identities\"\nlosses = [\"sigmod\"]\n").unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, Error::Parse { .. }));
    assert!(msg.contains("losses") && msg.contains("sigmod"), "{msg}");
}

#[test]
fn clean_cell_on_separable_data_is_nearly_perfect() {
    let cfg = parse(
        r#"
experiment = "noise_sweep"
seeds = [0, 1]
losses = ["sigmoid", "logistic"]
[gaussian]
mean_pos = [2.0, 2.0]
mean_neg = [-2.0, -2.0]
covariance = [0.5, 0.5]
n_pos = 500
n_neg = 500
n_test = 1000
[noise]
grid = [[1.0, 0.0]]
[train]
epochs = 20
"#,
    )
    .unwrap();
    let out = run(&cfg).unwrap();
    let runs = out.artifact("runs.csv").unwrap();
    for line in runs.lines().skip(1) {
        let ber: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(ber <= 0.05, "{line}");
    }
}

#[test]
fn sweep_output_is_deterministic_and_ordered() {
    let mut cfg = bundled::default_config(ExperimentKind::NoiseSweep).unwrap();
    cfg.seeds = vec![3, 1];
    cfg.gaussian.n_pos = 200;
    cfg.gaussian.n_neg = 200;
    cfg.gaussian.n_test = 200;
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.artifacts, b.artifacts);
    let seeds: Vec<&str> = a
        .artifact("runs.csv")
        .unwrap()
        .lines()
        .skip(1)
        .take(4)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(seeds, ["3", "1", "3", "1"]);
}

#[test]
fn manifest_replay_reproduces_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = bundled::default_config(ExperimentKind::PuDemo).unwrap();
    cfg.output_dir = dir.path().join("first");
    let out = run(&cfg).unwrap();
    let manifest = out.write(&cfg.output_dir, &cfg).unwrap();

    let mut again = ExperimentConfig::load(&manifest).unwrap();
    assert_eq!(again.seeds, cfg.seeds);
    again.output_dir = dir.path().join("second");
    run(&again).unwrap().write(&again.output_dir, &again).unwrap();
    for a in &out.artifacts {
        let first = std::fs::read(dir.path().join("first").join(&a.file)).unwrap();
        let second = std::fs::read(dir.path().join("second").join(&a.file)).unwrap();
        assert_eq!(first, second, "{}", a.file);
    }
    let echo: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(echo["artifacts"].as_array().unwrap().len(), out.artifacts.len());
    assert_eq!(echo["artifacts"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn missing_keyword_file_names_the_path() {
    let mut cfg = bundled::default_config(ExperimentKind::Keywords).unwrap();
    cfg.keywords.keywords = Some("does/not/exist.txt".into());
    let err = run_keywords(&cfg).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("does/not/exist.txt"), "{err}");
}

#[test]
fn keyword_run_is_frozen_at_seed_zero() {
    let cfg = bundled::default_config(ExperimentKind::Keywords).unwrap();
    let report = run_pipeline(
        &bundled::corpus().unwrap(),
        &bundled::keywords().unwrap(),
        &cfg.pipeline(),
    )
    .unwrap();
    let test = report.test.as_ref().unwrap();
    assert_eq!((report.n_pseudo_pos, report.n_pseudo_neg), (49, 191));
    assert!((report.empirical_pi_corr_pos.unwrap() - 37.0 / 49.0).abs() < 1e-15);
    assert!((report.empirical_pi_corr_neg.unwrap() - 35.0 / 191.0).abs() < 1e-15);
    assert!((test.auc - 0.959821428571).abs() < 1e-11, "{}", test.auc);
    assert!(report.warnings.iter().all(|w| !w.contains("not symmetric")));
}

#[test]
fn non_symmetric_loss_runs_with_a_warning() {
    let mut cfg = bundled::default_config(ExperimentKind::Keywords).unwrap();
    cfg.losses = vec![LossKind::Logistic];
    cfg.keywords.threshold_method = ThresholdChoice::Default;
    let out = run_keywords(&cfg).unwrap();
    let report = out.artifact("report_logistic_seed0.json").unwrap();
    assert!(report.contains("is not symmetric"));
}

#[test]
fn degenerate_tau_is_an_error_naming_tau() {
    let mut cfg = bundled::default_config(ExperimentKind::Keywords).unwrap();
    cfg.keywords.tau = 0.5;
    let err = run_keywords(&cfg).unwrap_err();
    assert!(matches!(err, Error::DegenerateSplit { .. }));
    assert!(err.to_string().contains("tau = 0.5"), "{err}");
}
