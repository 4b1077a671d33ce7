//! Experiment orchestration: collect, label, stats, train and eval stages
//! writing a reproducible artifact tree.
//!
//! ```text
//! <out>/config.json
//! <out>/logs/scenario_01.jsonl
//! <out>/datasets/scenario_01.bin (+ .json sidecar)
//! <out>/stats.csv
//! <out>/model/{checkpoint.json, loss.csv, train_manifest.json}
//! <out>/report/{auc.csv, auc.pgm, counts.pgm, eval_manifest.json}
//! <out>/manifest.json
//! ```

mod config;
mod logs;
mod manifest;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::format::{read_dataset, write_dataset, DatasetMeta};
use crate::dataset::{augment, compute_stats, generate_instances, AugmentLayout, DatasetError, DatasetStats, LabeledInstance};
use crate::eval::{report, write_auc_csv, write_auc_heatmap, write_count_heatmap, AucReport, EvalError};
use crate::nn::{predict, read_checkpoint, train, write_checkpoint, write_loss_csv, Checkpoint, NnError, Shape};
use crate::sim::{
    generate_floor_world, generate_obstacle_world, run_acquisition_traced, run_roamer_with, SimError,
};

pub use config::{ExperimentConfig, FloorSettings, NetworkSelection, ObstacleSettings, TargetSelection, TaskKind};
pub use logs::{read_log, write_log, LogHeader, Rates, LOG_FORMAT_VERSION};
pub use manifest::{sha256_file, Artifact, RunManifest};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("train/test overlap: scenarios {0:?} were used for training")]
    ScenarioOverlap(Vec<u32>),
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("malformed log {path}: {reason}")]
    MalformedLog { path: PathBuf, reason: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Seed streams derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStream {
    World = 1,
    Controller = 2,
    CameraMount = 3,
    Train = 4,
    Bootstrap = 5,
}

pub fn derive_seed(master: u64, stream: SeedStream, index: u64) -> u64 {
    let mut z = master
        ^ (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93)
        ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(29);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl ExperimentConfig {
    pub fn world_seed(&self, scenario: u32) -> u64 {
        match &self.world_seeds {
            Some(s) => s[scenario as usize - 1],
            None => derive_seed(self.seed, SeedStream::World, scenario as u64),
        }
    }

    pub fn controller_seed(&self, scenario: u32) -> u64 {
        derive_seed(self.seed, SeedStream::Controller, scenario as u64)
    }

    pub fn train_seed(&self) -> u64 {
        derive_seed(self.seed, SeedStream::Train, 0)
    }

    pub fn bootstrap_seed(&self) -> u64 {
        derive_seed(self.seed, SeedStream::Bootstrap, 0)
    }

    /// Camera yaws of the experiment, drawn once from the master seed when
    /// random mounts are enabled.
    pub fn mount_yaws(&self) -> Vec<f64> {
        if self.task == TaskKind::FloorGrid && self.floor.random_mount_yaws {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, SeedStream::CameraMount, 0));
            let lim = self.floor.mount_yaw_limit;
            (0..self.floor.cameras)
                .map(|_| if lim > 0.0 { rng.random_range(-lim..=lim) } else { 0.0 })
                .collect()
        } else {
            self.rig.camera_mount_yaws.clone()
        }
    }

    pub fn rig_for_run(&self) -> Result<crate::sim::SensorRig, PipelineError> {
        self.resolved_rig(&self.mount_yaws())
    }

    pub fn log_path(&self, scenario: u32) -> PathBuf {
        self.output_dir.join("logs").join(format!("scenario_{scenario:02}.jsonl"))
    }

    pub fn dataset_path(&self, scenario: u32) -> PathBuf {
        self.output_dir.join("datasets").join(format!("scenario_{scenario:02}.bin"))
    }

    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn require(path: &Path) -> Result<(), PipelineError> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::MissingArtifact(path.to_path_buf()))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

fn write_config(config: &ExperimentConfig) -> Result<(), PipelineError> {
    std::fs::create_dir_all(&config.output_dir)?;
    std::fs::write(config.output_dir.join("config.json"), config.canonical_json()?)?;
    Ok(())
}

/// Runs the controller of every scenario and writes one log per scenario.
pub fn cmd_collect(config: &ExperimentConfig) -> Result<Vec<PathBuf>, PipelineError> {
    config.validate()?;
    write_config(config)?;
    std::fs::create_dir_all(config.output_dir.join("logs"))?;
    let rig = config.rig_for_run()?;
    let paths = config
        .scenario_ids()
        .into_par_iter()
        .map(|id| {
            let world_seed = config.world_seed(id);
            let ctrl_seed = config.controller_seed(id);
            let (records, physics) = match config.task {
                TaskKind::FloorGrid => {
                    let f = &config.floor;
                    let world = generate_floor_world(world_seed, f.size, f.noise_frequency, f.threshold)?;
                    let r = run_roamer_with(&world, &rig, &f.roamer, config.duration, config.record_rate, ctrl_seed)?;
                    (r, f.roamer.physics_rate)
                }
                TaskKind::ObstacleLine => {
                    let o = &config.obstacles;
                    let world = generate_obstacle_world(world_seed, &o.arena)?;
                    let (r, _) = run_acquisition_traced(
                        &world,
                        &rig,
                        &o.acquisition,
                        config.duration,
                        config.record_rate,
                        ctrl_seed,
                    )?;
                    (r, o.acquisition.physics_rate)
                }
            };
            let header = LogHeader {
                format_version: LOG_FORMAT_VERSION,
                task: config.task,
                scenario: id,
                world_seed,
                controller_seed: ctrl_seed,
                rig: rig.clone(),
                rates: Rates {
                    record_hz: config.record_rate,
                    physics_hz: physics,
                },
                camera_mount_yaws: rig.camera_mount_yaws.clone(),
            };
            let path = config.log_path(id);
            write_log(&path, &header, &records)?;
            config.note(format!("collect: scenario {id}, {} records", records.len()));
            Ok(path)
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    write_manifest(config, None)?;
    Ok(paths)
}

/// Turns every log into a dataset and writes the aggregate label statistics.
pub fn cmd_label(config: &ExperimentConfig) -> Result<DatasetStats, PipelineError> {
    config.validate()?;
    let targets = config.targets.resolve()?;
    let sensors = config.sensors();
    std::fs::create_dir_all(config.output_dir.join("datasets"))?;
    for id in config.scenario_ids() {
        require(&config.log_path(id))?;
    }
    let per_scenario = config
        .scenario_ids()
        .into_par_iter()
        .map(|id| {
            let (header, records) = read_log(&config.log_path(id))?;
            if let Some(r) = records.iter().find(|r| r.short_readings.len() != sensors) {
                return Err(PipelineError::MalformedLog {
                    path: config.log_path(id),
                    reason: format!("record at t={} has {} short readings, expected {sensors}", r.t, r.short_readings.len()),
                });
            }
            let mut instances = generate_instances(&records, &targets, &config.matching)?;
            for inst in &mut instances {
                inst.source.scenario = id;
            }
            let meta = DatasetMeta::new(id, header.rig.layout(), targets.len(), sensors, instances.len());
            write_dataset(&config.dataset_path(id), &meta, &instances)?;
            let stats = compute_stats(&instances, targets.len(), sensors)?;
            config.note(format!("label: scenario {id}, {} instances", instances.len()));
            Ok(stats)
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let mut total = DatasetStats::empty(targets.len(), sensors);
    for s in &per_scenario {
        total.merge(s)?;
    }
    write_stats(config, &total)?;
    write_manifest(config, None)?;
    Ok(total)
}

fn write_stats(config: &ExperimentConfig, stats: &DatasetStats) -> Result<(), PipelineError> {
    let mut buf = Vec::new();
    stats.write_csv(&mut buf)?;
    std::fs::write(config.output_dir.join("stats.csv"), buf)?;
    Ok(())
}

/// Recounts the statistics from the dataset files.
pub fn cmd_stats(config: &ExperimentConfig) -> Result<DatasetStats, PipelineError> {
    config.validate()?;
    let targets = config.targets.resolve()?.len();
    let sensors = config.sensors();
    let mut total = DatasetStats::empty(targets, sensors);
    for id in config.scenario_ids() {
        let path = config.dataset_path(id);
        require(&path)?;
        let (_, data) = read_dataset(&path)?;
        total.merge(&compute_stats(&data, targets, sensors)?)?;
    }
    write_stats(config, &total)?;
    write_manifest(config, None)?;
    Ok(total)
}

fn load_scenarios(config: &ExperimentConfig, ids: &[u32]) -> Result<(DatasetMeta, Vec<LabeledInstance>), PipelineError> {
    let mut all = Vec::new();
    let mut meta = None;
    for &id in ids {
        let path = config.dataset_path(id);
        require(&path)?;
        let (m, data) = read_dataset(&path)?;
        all.extend(data);
        meta.get_or_insert(m);
    }
    let meta = meta.ok_or(PipelineError::EmptySplit("scenario"))?;
    Ok((meta, all))
}

/// Scenario ids a checkpoint was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainManifest {
    pub train_scenarios: Vec<u32>,
    pub instances: usize,
    pub checkpoint_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalManifest {
    pub train_scenarios: Vec<u32>,
    pub test_scenarios: Vec<u32>,
    pub instances: usize,
    pub checkpoint_sha256: String,
}

fn model_dir(config: &ExperimentConfig) -> PathBuf {
    config.output_dir.join("model")
}

fn report_dir(config: &ExperimentConfig) -> PathBuf {
    config.output_dir.join("report")
}

/// Trains on the train scenarios and writes checkpoint, loss history and a
/// manifest of the scenarios used.
pub fn cmd_train(config: &ExperimentConfig) -> Result<Checkpoint, PipelineError> {
    config.validate()?;
    let ids = config.train_scenarios();
    if ids.is_empty() {
        return Err(PipelineError::EmptySplit("train"));
    }
    let (meta, data) = load_scenarios(config, &ids)?;
    if data.is_empty() {
        return Err(PipelineError::EmptySplit("train"));
    }
    let layout = meta.layout;
    let spec = config
        .network
        .resolve(Shape::new(layout.height, layout.width, layout.channels), meta.label_count)?;
    let mut train_cfg = config.train.clone();
    train_cfg.seed = config.train_seed();

    let aug_layout = AugmentLayout {
        camera: layout,
        sensors: meta.sensors,
        sensor_pairs: if meta.sensors == 5 { vec![(0, 4), (1, 3)] } else { Vec::new() },
    };
    let aug_cfg = config.augmentation.clone();
    if aug_cfg.any() {
        augment(&data[0], &aug_layout, &aug_cfg, 0)?;
    }
    let hook = |inst: &LabeledInstance, seed: u64| augment(inst, &aug_layout, &aug_cfg, seed).expect("layout checked");
    config.note(format!(
        "train: {} instances from scenarios {ids:?}, {} parameters",
        data.len(),
        crate::nn::NetworkParams::zeros(&spec)?.count()
    ));
    let outcome = train(&data, &spec, &train_cfg, if aug_cfg.any() { Some(&hook) } else { None })?;
    for (k, l) in outcome.loss_history.iter().enumerate() {
        config.note(format!("train: epoch {} loss {l:.5}", k + 1));
    }
    let dir = model_dir(config);
    std::fs::create_dir_all(&dir)?;
    let ckpt = Checkpoint::new(spec, train_cfg, outcome.params);
    let ckpt_path = dir.join("checkpoint.json");
    write_checkpoint(&ckpt_path, &ckpt)?;
    write_loss_csv(&dir.join("loss.csv"), &outcome.loss_history)?;
    write_json(
        &dir.join("train_manifest.json"),
        &TrainManifest {
            train_scenarios: ids,
            instances: data.len(),
            checkpoint_sha256: sha256_file(&ckpt_path)?,
        },
    )?;
    write_manifest(config, None)?;
    Ok(ckpt)
}

/// Evaluates the checkpoint on the test scenarios, refusing checkpoints
/// trained on any of them.
pub fn cmd_eval(config: &ExperimentConfig) -> Result<AucReport, PipelineError> {
    config.validate()?;
    let test = config.test_scenarios();
    if test.is_empty() {
        return Err(PipelineError::EmptySplit("test"));
    }
    let dir = model_dir(config);
    let ckpt_path = dir.join("checkpoint.json");
    let tm_path = dir.join("train_manifest.json");
    require(&ckpt_path)?;
    require(&tm_path)?;
    let tm: TrainManifest = serde_json::from_str(&std::fs::read_to_string(&tm_path)?)?;
    let test_set: BTreeSet<u32> = test.iter().copied().collect();
    let overlap: Vec<u32> = tm.train_scenarios.iter().copied().filter(|id| test_set.contains(id)).collect();
    if !overlap.is_empty() {
        return Err(PipelineError::ScenarioOverlap(overlap));
    }
    let sha = sha256_file(&ckpt_path)?;
    if sha != tm.checkpoint_sha256 {
        return Err(PipelineError::Config("checkpoint does not match its train manifest".into()));
    }
    let ckpt = read_checkpoint(&ckpt_path)?;
    let (meta, data) = load_scenarios(config, &test)?;
    if data.is_empty() {
        return Err(PipelineError::EmptySplit("test"));
    }
    let preds = predict(&ckpt.params, &ckpt.spec, &data)?;
    let targets = config.targets.resolve()?;
    let rep = report(&preds, &data, meta.targets, meta.sensors, config.bootstrap_rounds, config.bootstrap_seed())?;
    let out = report_dir(config);
    std::fs::create_dir_all(&out)?;
    write_auc_csv(&out.join("auc.csv"), &rep)?;
    write_auc_heatmap(&out.join("auc.pgm"), &rep, targets.grid)?;
    write_count_heatmap(&out.join("counts.pgm"), &rep, targets.grid)?;
    write_json(
        &out.join("eval_manifest.json"),
        &EvalManifest {
            train_scenarios: tm.train_scenarios,
            test_scenarios: test,
            instances: data.len(),
            checkpoint_sha256: sha,
        },
    )?;
    config.note(format!("eval: {} test instances", data.len()));
    write_manifest(config, None)?;
    Ok(rep)
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub collect: f64,
    pub label: f64,
    pub train: f64,
    pub eval: f64,
}

/// Runs collect, label, train and eval in order, stopping at the first
/// error. With `dry_run` only the configuration is validated.
pub fn cmd_pipeline(config: &ExperimentConfig, dry_run: bool) -> Result<Option<AucReport>, PipelineError> {
    config.validate()?;
    if dry_run {
        config.note(format!(
            "dry run: {:?}, {} scenarios (train {:?}, test {:?}), output {}",
            config.task,
            config.scenarios,
            config.train_scenarios(),
            config.test_scenarios(),
            config.output_dir.display()
        ));
        return Ok(None);
    }
    let mut timings = StageTimings::default();
    let clock = Instant::now();
    cmd_collect(config)?;
    timings.collect = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    cmd_label(config)?;
    timings.label = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    cmd_train(config)?;
    timings.train = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let rep = cmd_eval(config)?;
    timings.eval = clock.elapsed().as_secs_f64();
    write_manifest(config, config.record_timings.then_some(timings))?;
    Ok(Some(rep))
}

fn write_manifest(config: &ExperimentConfig, timings: Option<StageTimings>) -> Result<(), PipelineError> {
    let m = RunManifest::scan(config, timings)?;
    write_json(&config.output_dir.join(manifest::MANIFEST_FILE), &m)
}
