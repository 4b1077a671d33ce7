//! JSON-lines trajectory logs: a header object, then one record per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PipelineError, TaskKind};
use crate::sim::{SensorRig, TrajectoryRecord};

pub const LOG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub record_hz: f64,
    pub physics_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format_version: u32,
    pub task: TaskKind,
    pub scenario: u32,
    pub world_seed: u64,
    pub controller_seed: u64,
    pub rig: SensorRig,
    pub rates: Rates,
    pub camera_mount_yaws: Vec<f64>,
}

pub fn write_log(path: &Path, header: &LogHeader, records: &[TrajectoryRecord]) -> Result<(), PipelineError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_log(path: &Path) -> Result<(LogHeader, Vec<TrajectoryRecord>), PipelineError> {
    let malformed = |reason: String| PipelineError::MalformedLog {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines.next().ok_or_else(|| malformed("empty file".into()))??;
    let header: LogHeader = serde_json::from_str(&first).map_err(|e| malformed(format!("header: {e}")))?;
    if header.format_version != LOG_FORMAT_VERSION {
        return Err(malformed(format!("unsupported format version {}", header.format_version)));
    }
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let r: TrajectoryRecord = serde_json::from_str(&line).map_err(|e| malformed(format!("line {}: {e}", k + 2)))?;
        records.push(r);
    }
    Ok((header, records))
}
