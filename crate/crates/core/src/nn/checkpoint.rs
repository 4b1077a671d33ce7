use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetworkParams, NetworkSpec, NnError, TrainConfig};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Self-describing trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub spec: NetworkSpec,
    pub config: TrainConfig,
    pub params: NetworkParams,
}

impl Checkpoint {
    pub fn new(spec: NetworkSpec, config: TrainConfig, params: NetworkParams) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            spec,
            config,
            params,
        }
    }
}

pub fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), NnError> {
    let mut text = serde_json::to_string(ckpt)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, NnError> {
    let ckpt: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if ckpt.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(NnError::Checkpoint(format!("unsupported format version {}", ckpt.format_version)));
    }
    ckpt.params
        .check_matches(&ckpt.spec)
        .map_err(|e| NnError::Checkpoint(e.to_string()))?;
    Ok(ckpt)
}

/// `epoch,mean_loss` with epochs counted from 1.
pub fn write_loss_csv(path: &Path, history: &[f64]) -> Result<(), NnError> {
    let mut out = String::from("epoch,mean_loss\n");
    for (k, loss) in history.iter().enumerate() {
        writeln!(out, "{},{loss:?}", k + 1).expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}
