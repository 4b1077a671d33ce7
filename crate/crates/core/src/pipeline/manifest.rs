use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, PipelineError, StageTimings};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
    /// Scenarios whose data went into the file.
    pub scenarios: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSeeds {
    pub master: u64,
    pub worlds: Vec<u64>,
    pub controllers: Vec<u64>,
    pub train: u64,
    pub bootstrap: u64,
    pub camera_mount_yaws: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_sha256: String,
    pub seeds: ManifestSeeds,
    pub train_scenarios: Vec<u32>,
    pub test_scenarios: Vec<u32>,
    pub artifacts: Vec<Artifact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<StageTimings>,
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let mut hasher = Sha256::new();
    let mut f = File::open(path)?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<(), PipelineError> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if e.file_type()?.is_dir() {
            walk(root, &p, out)?;
        } else {
            let rel = p.strip_prefix(root).expect("under root");
            let rel: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            out.push(rel.join("/"));
        }
    }
    Ok(())
}

fn scenarios_of(config: &ExperimentConfig, rel: &str) -> Vec<u32> {
    let file = rel.rsplit('/').next().unwrap_or(rel);
    if let Some(id) = file
        .strip_prefix("scenario_")
        .and_then(|s| s.split('.').next())
        .and_then(|s| s.parse().ok())
    {
        return vec![id];
    }
    if rel.starts_with("model/") {
        config.train_scenarios()
    } else if rel.starts_with("report/") {
        config.test_scenarios()
    } else if rel == "stats.csv" {
        config.scenario_ids()
    } else {
        Vec::new()
    }
}

impl RunManifest {
    /// Lists and hashes every file under the output directory.
    pub fn scan(config: &ExperimentConfig, timings: Option<StageTimings>) -> Result<Self, PipelineError> {
        let root = &config.output_dir;
        let mut files = Vec::new();
        walk(root, root, &mut files)?;
        let artifacts = files
            .into_iter()
            .filter(|f| f != MANIFEST_FILE)
            .map(|rel| {
                let path = root.join(&rel);
                Ok(Artifact {
                    bytes: std::fs::metadata(&path)?.len(),
                    sha256: sha256_file(&path)?,
                    scenarios: scenarios_of(config, &rel),
                    path: rel,
                })
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        let ids = config.scenario_ids();
        Ok(Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: format!("{:x}", Sha256::digest(config.canonical_json()?.as_bytes())),
            seeds: ManifestSeeds {
                master: config.seed,
                worlds: ids.iter().map(|&id| config.world_seed(id)).collect(),
                controllers: ids.iter().map(|&id| config.controller_seed(id)).collect(),
                train: config.train_seed(),
                bootstrap: config.bootstrap_seed(),
                camera_mount_yaws: config.mount_yaws(),
            },
            train_scenarios: config.train_scenarios(),
            test_scenarios: config.test_scenarios(),
            artifacts,
            timings,
        })
    }
}
