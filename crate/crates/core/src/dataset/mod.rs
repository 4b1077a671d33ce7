//! Masked multi-label training data from trajectory logs.

mod augment;
pub mod format;
mod matching;
mod split;
mod stats;
mod targets;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use augment::{augment, flip_horizontal, AugmentConfig, AugmentLayout};
pub use matching::{generate_instances, generate_instances_with, SearchIndex};
pub use split::{leave_one_scenario_out, split_by_scenario, Fold, ScenarioData};
pub use stats::{compute_stats, DatasetStats, LabelCounts};
pub use targets::{MatchSpec, TargetPoseSet};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("log is not sorted by time at record {index}")]
    UnsortedLog { index: usize },
    #[error("inconsistent log: {0}")]
    InconsistentLog(String),
    #[error("invalid match spec: {0}")]
    InvalidSpec(String),
    #[error("invalid target poses: {0}")]
    InvalidTargets(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("unknown scenario id {0}")]
    UnknownScenario(u32),
    #[error("scenario id {0} appears more than once")]
    DuplicateScenario(u32),
    #[error("malformed dataset: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSource {
    pub scenario: u32,
    pub t: f64,
}

/// One training example: the long-range reading and `n * m` labels, of which
/// only those with `mask == 1` are known. Unknown labels are stored as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub input: Vec<f32>,
    pub labels: Vec<u8>,
    pub mask: Vec<u8>,
    pub source: InstanceSource,
}

impl LabeledInstance {
    pub fn known(&self) -> usize {
        self.mask.iter().filter(|&&m| m == 1).count()
    }
}
