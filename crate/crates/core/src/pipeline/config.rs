use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::PipelineError;
use crate::dataset::{AugmentConfig, MatchSpec, TargetPoseSet};
use crate::geom::Pose2;
use crate::nn::{Layer, NetworkSpec, Shape, TrainConfig};
use crate::sim::{AcquisitionConfig, ObstacleWorldSpec, RoamerConfig, SensorRig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    /// Roaming robot, floor probe, downward patch cameras, 17 x 17 targets.
    FloorGrid,
    /// Acquisition controller in obstacle arenas, five proximity sensors,
    /// line camera, 31 targets ahead.
    ObstacleLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSelection {
    ThymioLine,
    Grid17,
    Custom { poses: Vec<Pose2>, grid: (usize, usize) },
}

impl TargetSelection {
    pub fn resolve(&self) -> Result<TargetPoseSet, PipelineError> {
        Ok(match self {
            TargetSelection::ThymioLine => TargetPoseSet::thymio_line(),
            TargetSelection::Grid17 => TargetPoseSet::grid17(),
            TargetSelection::Custom { poses, grid } => TargetPoseSet::new(poses.clone(), *grid)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSelection {
    Lenet,
    Mlp { hidden: usize },
    Custom { layers: Vec<Layer> },
}

impl NetworkSelection {
    pub fn resolve(&self, input: Shape, outputs: usize) -> Result<NetworkSpec, PipelineError> {
        Ok(match self {
            NetworkSelection::Lenet => NetworkSpec::lenet(input, outputs)?,
            NetworkSelection::Mlp { hidden } => NetworkSpec::mlp(input, *hidden, outputs)?,
            NetworkSelection::Custom { layers } => NetworkSpec::with_outputs(input, layers.clone(), outputs)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FloorSettings {
    pub size: f64,
    /// Cycles per meter of the gradient noise.
    pub noise_frequency: f64,
    pub threshold: f64,
    pub roamer: RoamerConfig,
    /// Draw `cameras` mount yaws once per experiment from
    /// `[-mount_yaw_limit, mount_yaw_limit]`; otherwise use the rig's yaws.
    pub random_mount_yaws: bool,
    pub cameras: usize,
    pub mount_yaw_limit: f64,
}

impl Default for FloorSettings {
    fn default() -> Self {
        Self {
            size: 50.0,
            noise_frequency: 0.05,
            threshold: 0.0,
            roamer: RoamerConfig::default(),
            random_mount_yaws: true,
            cameras: 3,
            mount_yaw_limit: 60f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleSettings {
    pub arena: ObstacleWorldSpec,
    pub acquisition: AcquisitionConfig,
}

/// Everything a run depends on. Scenario ids are `1..=scenarios`; every
/// scenario not listed in `test_scenarios` is used for training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    /// Master seed; world, controller, camera, training and bootstrap seeds
    /// are derived from it.
    pub seed: u64,
    pub scenarios: u32,
    /// Explicit world seeds, one per scenario, overriding the derived ones.
    pub world_seeds: Option<Vec<u64>>,
    /// Simulated seconds per scenario.
    pub duration: f64,
    pub record_rate: f64,
    pub floor: FloorSettings,
    pub obstacles: ObstacleSettings,
    pub rig: SensorRig,
    pub targets: TargetSelection,
    pub matching: MatchSpec,
    pub network: NetworkSelection,
    /// `train.seed` is replaced by a seed derived from `seed`.
    pub train: TrainConfig,
    pub augmentation: AugmentConfig,
    pub test_scenarios: BTreeSet<u32>,
    pub bootstrap_rounds: usize,
    /// Adds wall-clock timings to the manifest (which then stops being
    /// reproducible).
    pub record_timings: bool,
    #[serde(skip, default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub quiet: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn floor_grid() -> Self {
        Self {
            task: TaskKind::FloorGrid,
            seed: 1,
            scenarios: 10,
            world_seeds: None,
            duration: 420.0,
            record_rate: 20.0,
            floor: FloorSettings {
                noise_frequency: 0.15,
                ..FloorSettings::default()
            },
            obstacles: ObstacleSettings::default(),
            rig: SensorRig::floor_patch(vec![0.0]),
            targets: TargetSelection::Grid17,
            matching: MatchSpec::grid17(),
            network: NetworkSelection::Lenet,
            train: TrainConfig::default(),
            augmentation: AugmentConfig::none(),
            test_scenarios: (6..=10).collect(),
            bootstrap_rounds: 100,
            record_timings: false,
            output_dir: default_output_dir(),
            quiet: false,
        }
    }

    pub fn obstacle_line() -> Self {
        Self {
            task: TaskKind::ObstacleLine,
            seed: 1,
            scenarios: 10,
            world_seeds: None,
            duration: 600.0,
            record_rate: 10.0,
            floor: FloorSettings::default(),
            obstacles: ObstacleSettings::default(),
            rig: SensorRig::obstacle_linescan(33),
            targets: TargetSelection::ThymioLine,
            matching: MatchSpec::thymio_line(),
            network: NetworkSelection::Mlp { hidden: 128 },
            train: TrainConfig::default(),
            augmentation: AugmentConfig {
                grayscale: false,
                shadow: false,
                ..AugmentConfig::default()
            },
            test_scenarios: [9, 10].into(),
            bootstrap_rounds: 100,
            record_timings: false,
            output_dir: default_output_dir(),
            quiet: false,
        }
    }

    pub fn preset(task: TaskKind) -> Self {
        match task {
            TaskKind::FloorGrid => Self::floor_grid(),
            TaskKind::ObstacleLine => Self::obstacle_line(),
        }
    }

    /// Parses a JSON document over the preset named by its `task` key
    /// (floor-grid when absent). Nested objects are merged key by key;
    /// unknown keys are errors.
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let user: Value = serde_json::from_str(text)?;
        if !user.is_object() {
            return Err(PipelineError::Config("configuration must be a JSON object".into()));
        }
        let task = match user.get("task") {
            Some(t) => serde_json::from_value(t.clone())?,
            None => TaskKind::FloorGrid,
        };
        let mut base = serde_json::to_value(Self::preset(task))?;
        merge(&mut base, user);
        let config: Self = serde_json::from_value(base)?;
        config.validate()?;
        Ok(config)
    }

    pub fn scenario_ids(&self) -> Vec<u32> {
        (1..=self.scenarios).collect()
    }

    pub fn train_scenarios(&self) -> Vec<u32> {
        self.scenario_ids()
            .into_iter()
            .filter(|id| !self.test_scenarios.contains(id))
            .collect()
    }

    pub fn test_scenarios(&self) -> Vec<u32> {
        self.test_scenarios.iter().copied().collect()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.scenarios == 0 {
            return bad("at least one scenario is required".into());
        }
        if let Some(seeds) = &self.world_seeds {
            if seeds.len() != self.scenarios as usize {
                return bad(format!("{} world seeds for {} scenarios", seeds.len(), self.scenarios));
            }
        }
        if let Some(&id) = self.test_scenarios.iter().find(|&&id| id == 0 || id > self.scenarios) {
            return bad(format!("test scenario {id} is not in 1..={}", self.scenarios));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be non-negative, got {}", self.duration));
        }
        if !(self.record_rate > 0.0) {
            return bad("record_rate must be positive".into());
        }
        if self.bootstrap_rounds == 0 {
            return bad("bootstrap_rounds must be positive".into());
        }
        let rig = self.resolved_rig(&[])?;
        rig.validate()?;
        let expected_kind = match self.task {
            TaskKind::FloorGrid => crate::sim::CameraKind::Patch,
            TaskKind::ObstacleLine => crate::sim::CameraKind::Linescan,
        };
        if rig.camera_kind != expected_kind {
            return bad(format!("{:?} needs a {:?} camera", self.task, expected_kind));
        }
        if self.task == TaskKind::FloorGrid {
            let f = &self.floor;
            crate::sim::generate_floor_world(0, f.size, f.noise_frequency, f.threshold)?;
            if f.random_mount_yaws && (f.cameras == 0 || !(f.mount_yaw_limit >= 0.0)) {
                return bad("random mount yaws need cameras >= 1 and a non-negative limit".into());
            }
        }
        self.matching.validate()?;
        let targets = self.targets.resolve()?;
        self.train.validate()?;
        let layout = rig.layout();
        let sensors = self.sensors();
        self.network.resolve(
            Shape::new(layout.height, layout.width, layout.channels),
            targets.len() * sensors,
        )?;
        Ok(())
    }

    /// Short-range sensors per record.
    pub fn sensors(&self) -> usize {
        match self.task {
            TaskKind::FloorGrid => 1,
            TaskKind::ObstacleLine => self.rig.proximity_angles.len(),
        }
    }

    /// The rig with the experiment's mount yaws (`yaws` when non-empty).
    pub fn resolved_rig(&self, yaws: &[f64]) -> Result<SensorRig, PipelineError> {
        let mut rig = self.rig.clone();
        if self.task == TaskKind::FloorGrid && self.floor.random_mount_yaws {
            rig.camera_mount_yaws = if yaws.is_empty() {
                vec![0.0; self.floor.cameras.max(1)]
            } else {
                yaws.to_vec()
            };
        }
        Ok(rig)
    }

    /// Canonical serialization used for hashing and for `config.json`.
    pub fn canonical_json(&self) -> Result<String, PipelineError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    // tagged enums are replaced wholesale so variants don't mix
                    Some(slot) if slot.is_object() && v.is_object() && v.get("kind").is_none() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        ExperimentConfig::floor_grid().validate().unwrap();
        ExperimentConfig::obstacle_line().validate().unwrap();
    }

    #[test]
    fn json_overrides_preset() {
        let c = ExperimentConfig::from_json(
            r#"{"task": "obstacle-line", "duration": 5, "train": {"epochs": 2},
                "test_scenarios": [10], "targets": {"kind": "thymio_line"}}"#,
        )
        .unwrap();
        assert_eq!(c.task, TaskKind::ObstacleLine);
        assert_eq!(c.duration, 5.0);
        assert_eq!(c.train.epochs, 2);
        assert_eq!(c.train.batch_size, 64);
        assert_eq!(c.record_rate, 10.0);
        assert_eq!(c.train_scenarios(), (1..=9).collect::<Vec<_>>());
        let d = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(d, ExperimentConfig::floor_grid());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"durations": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"train": {"epoch": 3}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"test_scenarios": [11]}"#).is_err());
        assert!(ExperimentConfig::from_json("[]").is_err());
    }

    #[test]
    fn mismatched_network_rejected() {
        let r = ExperimentConfig::from_json(
            r#"{"network": {"kind": "custom", "layers": [{"kind": "dense", "units": 3}]}}"#,
        );
        assert!(r.is_err());
    }
}
