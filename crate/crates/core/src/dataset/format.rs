//! Length-prefixed little-endian dataset records with a JSON sidecar.
//!
//! Each record is a `u32` body length followed by the body:
//! `u32` scenario, `f64` time, `input_len` × `f32` inputs, then the labels
//! and the mask, each bit-packed LSB-first into `ceil(label_count / 8)` bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DatasetError, InstanceSource, LabeledInstance};
use crate::sim::CameraLayout;

pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub scenario: u32,
    pub layout: CameraLayout,
    pub input_len: usize,
    pub targets: usize,
    pub sensors: usize,
    pub label_count: usize,
    pub instances: usize,
}

impl DatasetMeta {
    pub fn new(scenario: u32, layout: CameraLayout, targets: usize, sensors: usize, instances: usize) -> Self {
        Self {
            format_version: DATASET_FORMAT_VERSION,
            scenario,
            layout,
            input_len: layout.len(),
            targets,
            sensors,
            label_count: targets * sensors,
            instances,
        }
    }

    fn packed_len(&self) -> usize {
        self.label_count.div_ceil(8)
    }

    fn body_len(&self) -> usize {
        4 + 8 + 4 * self.input_len + 2 * self.packed_len()
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn pack(bits: &[u8], out: &mut Vec<u8>) {
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            if b != 0 {
                byte |= 1 << i;
            }
        }
        out.push(byte);
    }
}

fn unpack(bytes: &[u8], n: usize) -> Vec<u8> {
    (0..n).map(|k| (bytes[k / 8] >> (k % 8)) & 1).collect()
}

pub fn encode_instance(inst: &LabeledInstance, meta: &DatasetMeta) -> Result<Vec<u8>, DatasetError> {
    if inst.input.len() != meta.input_len || inst.labels.len() != meta.label_count || inst.mask.len() != meta.label_count {
        return Err(DatasetError::LayoutMismatch(format!(
            "instance shape ({}, {}) does not match dataset ({}, {})",
            inst.input.len(),
            inst.labels.len(),
            meta.input_len,
            meta.label_count
        )));
    }
    let body = meta.body_len();
    let mut out = Vec::with_capacity(4 + body);
    out.extend_from_slice(&(body as u32).to_le_bytes());
    out.extend_from_slice(&inst.source.scenario.to_le_bytes());
    out.extend_from_slice(&inst.source.t.to_le_bytes());
    for v in &inst.input {
        out.extend_from_slice(&v.to_le_bytes());
    }
    pack(&inst.labels, &mut out);
    pack(&inst.mask, &mut out);
    Ok(out)
}

pub fn decode_instance(body: &[u8], meta: &DatasetMeta) -> Result<LabeledInstance, DatasetError> {
    if body.len() != meta.body_len() {
        return Err(DatasetError::Format(format!(
            "record body has {} bytes, expected {}",
            body.len(),
            meta.body_len()
        )));
    }
    let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().expect("4 bytes"));
    let scenario = u32_at(0);
    let t = f64::from_le_bytes(body[4..12].try_into().expect("8 bytes"));
    let mut o = 12;
    let input = (0..meta.input_len)
        .map(|k| f32::from_le_bytes(body[o + 4 * k..o + 4 * k + 4].try_into().expect("4 bytes")))
        .collect();
    o += 4 * meta.input_len;
    let p = meta.packed_len();
    let labels = unpack(&body[o..o + p], meta.label_count);
    let mask = unpack(&body[o + p..o + 2 * p], meta.label_count);
    Ok(LabeledInstance {
        input,
        labels,
        mask,
        source: InstanceSource { scenario, t },
    })
}

/// Writes `path` and its sidecar.
pub fn write_dataset(path: &Path, meta: &DatasetMeta, instances: &[LabeledInstance]) -> Result<(), DatasetError> {
    if meta.instances != instances.len() {
        return Err(DatasetError::Format("instance count disagrees with metadata".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    for inst in instances {
        w.write_all(&encode_instance(inst, meta)?)?;
    }
    w.flush()?;
    let mut side = serde_json::to_string_pretty(meta)?;
    side.push('\n');
    std::fs::write(sidecar_path(path), side)?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<DatasetMeta, DatasetError> {
    let text = std::fs::read_to_string(sidecar_path(path))?;
    let meta: DatasetMeta = serde_json::from_str(&text)?;
    if meta.format_version != DATASET_FORMAT_VERSION {
        return Err(DatasetError::Format(format!("unsupported format version {}", meta.format_version)));
    }
    Ok(meta)
}

pub fn read_dataset(path: &Path) -> Result<(DatasetMeta, Vec<LabeledInstance>), DatasetError> {
    let meta = read_meta(path)?;
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::with_capacity(meta.instances);
    let mut len = [0u8; 4];
    let mut body = Vec::new();
    loop {
        match r.read_exact(&mut len) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        body.resize(u32::from_le_bytes(len) as usize, 0);
        r.read_exact(&mut body)
            .map_err(|_| DatasetError::Format("truncated record".into()))?;
        out.push(decode_instance(&body, &meta)?);
    }
    if out.len() != meta.instances {
        return Err(DatasetError::Format(format!(
            "file holds {} records, sidecar says {}",
            out.len(),
            meta.instances
        )));
    }
    Ok((meta, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn meta(labels: usize) -> DatasetMeta {
        DatasetMeta::new(3, CameraLayout { height: 1, width: 3, channels: 2 }, labels, 1, 0)
    }

    proptest! {
        #[test]
        fn record_round_trip(
            input in proptest::collection::vec(0.0f32..1.0, 6),
            bits in proptest::collection::vec((0u8..2, 0u8..2), 1..40),
            t in 0.0..1e4f64,
        ) {
            let (labels, mask): (Vec<u8>, Vec<u8>) = bits.into_iter().unzip();
            let m = meta(labels.len());
            let inst = LabeledInstance { input, labels, mask, source: InstanceSource { scenario: 3, t } };
            let bytes = encode_instance(&inst, &m).unwrap();
            prop_assert_eq!(bytes.len(), 4 + m.body_len());
            let back = decode_instance(&bytes[4..], &m).unwrap();
            prop_assert_eq!(back, inst);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let data: Vec<_> = (0..5)
            .map(|k| LabeledInstance {
                input: vec![k as f32 * 0.1; 6],
                labels: vec![1, 0, 1, 0, 1, 0, 1, 0, 1],
                mask: vec![1, 1, 0, 0, 1, 1, 0, 0, 1],
                source: InstanceSource { scenario: 3, t: k as f64 },
            })
            .collect();
        let mut m = meta(9);
        m.instances = 5;
        write_dataset(&path, &m, &data).unwrap();
        let (m2, back) = read_dataset(&path).unwrap();
        assert_eq!(m2, m);
        assert_eq!(back, data);
        // 4 + 4 + 8 + 24 + 2 + 2 bytes per record
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 5 * 44);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let inst = LabeledInstance {
            input: vec![0.0; 5],
            labels: vec![0; 4],
            mask: vec![0; 4],
            source: InstanceSource { scenario: 0, t: 0.0 },
        };
        assert!(encode_instance(&inst, &meta(4)).is_err());
    }
}
