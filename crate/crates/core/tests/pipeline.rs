use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use longrange::dataset::format::read_dataset;
use longrange::pipeline::{
    cmd_collect, cmd_eval, cmd_label, cmd_pipeline, cmd_stats, cmd_train, read_log, sha256_file, ExperimentConfig,
    PipelineError, RunManifest,
};

fn small_floor(out: &Path) -> ExperimentConfig {
    let mut config = ExperimentConfig::from_json(
        r#"{
            "task": "floor-grid",
            "scenarios": 4,
            "duration": 15.0,
            "test_scenarios": [3, 4],
            "train": {"epochs": 2, "steps_per_epoch": 5, "batch_size": 8},
            "bootstrap_rounds": 5
        }"#,
    )
    .unwrap();
    config.output_dir = out.to_path_buf();
    config.quiet = true;
    config
}

#[test]
fn floor_run_produces_listed_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_floor(dir.path());
    let report = cmd_pipeline(&config, false).unwrap().expect("not a dry run");
    assert_eq!(report.targets, 289);
    assert_eq!(report.sensors, 1);

    let (meta, data) = read_dataset(&config.dataset_path(1)).unwrap();
    assert_eq!(meta.label_count, 289);
    assert!(data.iter().all(|i| i.source.scenario == 1 && i.labels.len() == 289));

    let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let manifest: RunManifest = serde_json::from_str(&text).unwrap();
    assert!(manifest.timings.is_none());
    let listed: BTreeSet<&str> = manifest.artifacts.iter().map(|a| a.path.as_str()).collect();
    for expected in [
        "config.json",
        "logs/scenario_01.jsonl",
        "datasets/scenario_04.bin",
        "datasets/scenario_04.json",
        "stats.csv",
        "model/checkpoint.json",
        "model/loss.csv",
        "model/train_manifest.json",
        "report/auc.csv",
        "report/auc.pgm",
        "report/counts.pgm",
        "report/eval_manifest.json",
    ] {
        assert!(listed.contains(expected), "{expected} missing from manifest");
    }
    for a in &manifest.artifacts {
        assert_eq!(sha256_file(&dir.path().join(&a.path)).unwrap(), a.sha256);
        if a.path.starts_with("model/") {
            assert_eq!(a.scenarios, vec![1, 2]);
        }
        if a.path.starts_with("report/") {
            assert_eq!(a.scenarios, vec![3, 4]);
        }
    }
    assert_eq!(manifest.train_scenarios, vec![1, 2]);
    assert_eq!(manifest.test_scenarios, vec![3, 4]);
}

#[test]
fn eval_refuses_overlapping_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_floor(dir.path());
    cmd_collect(&config).unwrap();
    cmd_label(&config).unwrap();
    cmd_train(&config).unwrap();
    let mut leaky = config.clone();
    leaky.test_scenarios = [2, 3, 4].into();
    match cmd_eval(&leaky) {
        Err(PipelineError::ScenarioOverlap(ids)) => assert_eq!(ids, vec![2]),
        other => panic!("expected overlap error, got {other:?}"),
    }
    assert!(!dir.path().join("report").exists());
    cmd_eval(&config).unwrap();
}

#[test]
fn stages_report_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_floor(dir.path());
    assert!(matches!(cmd_label(&config), Err(PipelineError::MissingArtifact(_))));
    assert!(matches!(cmd_train(&config), Err(PipelineError::MissingArtifact(_))));
    assert!(matches!(cmd_eval(&config), Err(PipelineError::MissingArtifact(_))));
    assert!(matches!(cmd_stats(&config), Err(PipelineError::MissingArtifact(_))));
}

#[test]
fn zero_duration_gives_header_only_logs() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_floor(dir.path());
    config.duration = 0.0;
    let logs = cmd_collect(&config).unwrap();
    assert_eq!(logs.len(), 4);
    for path in &logs {
        let (header, records) = read_log(path).unwrap();
        assert!(records.is_empty());
        assert_eq!(header.camera_mount_yaws, config.mount_yaws());
        assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 1);
    }
    let stats = cmd_label(&config).unwrap();
    assert_eq!(stats.instances, 0);
    assert!(stats.known_pos.iter().chain(&stats.known_neg).all(|&c| c == 0));
    assert!(matches!(cmd_train(&config), Err(PipelineError::EmptySplit("train"))));
}

#[test]
fn obstacle_instances_have_155_labels() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::from_json(r#"{"task": "obstacle-line", "scenarios": 2, "duration": 20.0, "test_scenarios": [2]}"#).unwrap();
    config.output_dir = dir.path().to_path_buf();
    config.quiet = true;
    cmd_collect(&config).unwrap();
    let stats = cmd_label(&config).unwrap();
    assert_eq!(stats.known_pos.len(), 155);
    assert!(stats.instances > 0);
    let (meta, _) = read_dataset(&config.dataset_path(2)).unwrap();
    assert_eq!(meta.label_count, 155);
    assert_eq!(meta.sensors, 5);
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = small_floor(&out);
    assert!(cmd_pipeline(&config, true).unwrap().is_none());
    assert!(!out.exists());
}

#[test]
fn empty_test_split_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_floor(dir.path());
    config.test_scenarios.clear();
    assert!(cmd_pipeline(&config, false).is_err());
}

#[test]
fn cli_dry_run_and_errors() {
    let exe = env!("CARGO_BIN_EXE_longrange");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"task": "obstacle-line", "scenarios": 3, "test_scenarios": [3]}"#).unwrap();
    let out = dir.path().join("out");

    let ok = Command::new(exe)
        .args(["pipeline", "--dry-run", "--quiet", "--seed", "9", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(!out.exists());

    std::fs::write(&cfg, r#"{"task": "obstacle-line", "scenaros": 3}"#).unwrap();
    let bad = Command::new(exe).args(["collect", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error: config:"));

    let missing = Command::new(exe).args(["train", "--quiet", "--out"]).arg(&out).output().unwrap();
    assert_eq!(missing.status.code(), Some(3));
}
