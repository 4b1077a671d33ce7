use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{DatasetError, LabeledInstance};

/// Known-positive, known-negative and unknown counts per label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sensors: usize,
    pub instances: u64,
    pub known_pos: Vec<u64>,
    pub known_neg: Vec<u64>,
    pub unknown: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelCounts {
    pub known_pos: u64,
    pub known_neg: u64,
    pub unknown: u64,
}

impl LabelCounts {
    pub fn known(&self) -> u64 {
        self.known_pos + self.known_neg
    }
}

impl DatasetStats {
    pub fn empty(targets: usize, sensors: usize) -> Self {
        let n = targets * sensors;
        Self {
            sensors,
            instances: 0,
            known_pos: vec![0; n],
            known_neg: vec![0; n],
            unknown: vec![0; n],
        }
    }

    pub fn labels(&self) -> usize {
        self.known_pos.len()
    }

    pub fn targets(&self) -> usize {
        self.labels().checked_div(self.sensors).unwrap_or(0)
    }

    pub fn add(&mut self, inst: &LabeledInstance) -> Result<(), DatasetError> {
        if inst.labels.len() != self.labels() || inst.mask.len() != self.labels() {
            return Err(DatasetError::LayoutMismatch(format!(
                "instance has {} labels, stats expect {}",
                inst.labels.len(),
                self.labels()
            )));
        }
        self.instances += 1;
        for (k, (&l, &m)) in inst.labels.iter().zip(&inst.mask).enumerate() {
            match (m, l) {
                (0, _) => self.unknown[k] += 1,
                (_, 0) => self.known_neg[k] += 1,
                _ => self.known_pos[k] += 1,
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &DatasetStats) -> Result<(), DatasetError> {
        if other.labels() != self.labels() || other.sensors != self.sensors {
            return Err(DatasetError::LayoutMismatch("cannot merge stats of different shapes".into()));
        }
        self.instances += other.instances;
        for k in 0..self.labels() {
            self.known_pos[k] += other.known_pos[k];
            self.known_neg[k] += other.known_neg[k];
            self.unknown[k] += other.unknown[k];
        }
        Ok(())
    }

    pub fn label(&self, target: usize, sensor: usize) -> LabelCounts {
        let k = target * self.sensors + sensor;
        LabelCounts {
            known_pos: self.known_pos[k],
            known_neg: self.known_neg[k],
            unknown: self.unknown[k],
        }
    }

    /// Counts summed over the sensors of one target pose.
    pub fn per_target(&self, target: usize) -> LabelCounts {
        (0..self.sensors).map(|i| self.label(target, i)).fold(
            LabelCounts {
                known_pos: 0,
                known_neg: 0,
                unknown: 0,
            },
            |a, b| LabelCounts {
                known_pos: a.known_pos + b.known_pos,
                known_neg: a.known_neg + b.known_neg,
                unknown: a.unknown + b.unknown,
            },
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "target_index,sensor_index,known_pos,known_neg,unknown")?;
        for j in 0..self.targets() {
            for i in 0..self.sensors {
                let c = self.label(j, i);
                writeln!(w, "{j},{i},{},{},{}", c.known_pos, c.known_neg, c.unknown)?;
            }
        }
        Ok(())
    }
}

/// Exact per-label counts over a dataset.
pub fn compute_stats<'a, I>(
    dataset: I,
    targets: usize,
    sensors: usize,
) -> Result<DatasetStats, DatasetError>
where
    I: IntoIterator<Item = &'a LabeledInstance>,
{
    let mut stats = DatasetStats::empty(targets, sensors);
    for inst in dataset {
        stats.add(inst)?;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::InstanceSource;

    fn inst(labels: Vec<u8>, mask: Vec<u8>) -> LabeledInstance {
        LabeledInstance {
            input: vec![0.0],
            labels,
            mask,
            source: InstanceSource { scenario: 1, t: 0.0 },
        }
    }

    #[test]
    fn empty_dataset_is_zero() {
        let s = compute_stats(&[], 31, 5).unwrap();
        assert_eq!(s.instances, 0);
        assert!(s.known_pos.iter().chain(&s.known_neg).chain(&s.unknown).all(|&c| c == 0));
        assert_eq!(s.labels(), 155);
    }

    #[test]
    fn counts_sum_to_instances() {
        let data = vec![
            inst(vec![1, 0, 0, 0], vec![1, 1, 0, 0]),
            inst(vec![0, 1, 1, 0], vec![1, 1, 1, 1]),
            inst(vec![1, 1, 0, 0], vec![1, 1, 0, 0]),
        ];
        let s = compute_stats(&data, 2, 2).unwrap();
        for k in 0..4 {
            assert_eq!(s.known_pos[k] + s.known_neg[k] + s.unknown[k], 3);
        }
        assert_eq!(s.label(0, 0), LabelCounts { known_pos: 2, known_neg: 1, unknown: 0 });
        assert_eq!(s.per_target(1), LabelCounts { known_pos: 1, known_neg: 1, unknown: 4 });
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0,0,2,1,0");
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn identity_target_scales_with_sensors() {
        // every instance knows its five identity-pose labels
        let data: Vec<_> = (0..1000)
            .map(|k| {
                let mut labels = vec![0u8; 10];
                let mut mask = vec![0u8; 10];
                mask[..5].fill(1);
                labels[k % 5] = 1;
                inst(labels, mask)
            })
            .collect();
        let s = compute_stats(&data, 2, 5).unwrap();
        assert_eq!(s.per_target(0).known(), 5000);
        assert_eq!(s.per_target(1).known(), 0);
    }

    #[test]
    fn layout_mismatch_rejected() {
        let data = vec![inst(vec![0; 3], vec![1; 3])];
        assert!(compute_stats(&data, 2, 2).is_err());
    }
}
