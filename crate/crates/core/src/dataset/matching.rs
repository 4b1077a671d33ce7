//! Self-supervised label generation by matching recorded poses against
//! target poses.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{DatasetError, InstanceSource, LabeledInstance, MatchSpec, TargetPoseSet};
use crate::geom::pose_distance;
use crate::sim::TrajectoryRecord;

/// Candidate lookup used by the matcher. Both strategies return identical
/// instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchIndex {
    /// Hash when the average window holds more than 1000 records.
    #[default]
    Auto,
    /// Linear scan over the time window.
    WindowScan,
    /// Uniform spatial hash with cell size `delta`.
    SpatialHash,
}

const HASH_THRESHOLD: f64 = 1000.0;

/// Best match so far, ordered by distance, then temporal offset, then
/// record index.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    distance: f64,
    offset: f64,
    index: usize,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (self.distance, self.offset, self.index) < (other.distance, other.offset, other.index)
    }
}

fn check_sorted(log: &[TrajectoryRecord]) -> Result<(), DatasetError> {
    for (i, w) in log.windows(2).enumerate() {
        if !(w[1].t >= w[0].t) {
            return Err(DatasetError::UnsortedLog { index: i + 1 });
        }
    }
    Ok(())
}

fn window_bounds(log: &[TrajectoryRecord], t: f64, window: f64) -> (usize, usize) {
    let lo = log.partition_point(|r| r.t < t - window);
    let hi = log.partition_point(|r| r.t <= t + window);
    (lo, hi)
}

struct SpatialHash {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialHash {
    fn new(log: &[TrajectoryRecord], delta: f64) -> Self {
        // slightly larger than delta so that a 3x3 neighborhood always
        // covers the tolerance disc despite rounding
        let cell = delta * (1.0 + 1e-6);
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, r) in log.iter().enumerate() {
            cells.entry(Self::key(cell, r.pose.x, r.pose.y)).or_default().push(i);
        }
        Self { cell, cells }
    }

    fn key(cell: f64, x: f64, y: f64) -> (i64, i64) {
        ((x / cell).floor() as i64, (y / cell).floor() as i64)
    }

    fn for_each_near(&self, x: f64, y: f64, lo: usize, hi: usize, mut f: impl FnMut(usize)) {
        let (cx, cy) = Self::key(self.cell, x, y);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = self.cells.get(&(cx + dx, cy + dy)) {
                    let a = list.partition_point(|&i| i < lo);
                    let b = list.partition_point(|&i| i < hi);
                    list[a..b].iter().for_each(|&i| f(i));
                }
            }
        }
    }
}

/// Turns a time-sorted log into labeled instances.
///
/// For every record and target pose, the record in the two-sided time window
/// whose pose is closest to the absolute target supplies the labels of that
/// target if it lies within `delta`; otherwise the target's labels are masked.
/// Instances with no known label are dropped. Scenario ids are left at 0.
pub fn generate_instances(
    log: &[TrajectoryRecord],
    targets: &TargetPoseSet,
    spec: &MatchSpec,
) -> Result<Vec<LabeledInstance>, DatasetError> {
    generate_instances_with(log, targets, spec, SearchIndex::Auto)
}

pub fn generate_instances_with(
    log: &[TrajectoryRecord],
    targets: &TargetPoseSet,
    spec: &MatchSpec,
    index: SearchIndex,
) -> Result<Vec<LabeledInstance>, DatasetError> {
    spec.validate()?;
    targets.validate()?;
    check_sorted(log)?;
    let Some(first) = log.first() else {
        return Ok(Vec::new());
    };
    let m = first.short_readings.len();
    if let Some(i) = log.iter().position(|r| r.short_readings.len() != m) {
        return Err(DatasetError::InconsistentLog(format!(
            "record {i} has {} short-range readings, expected {m}",
            log[i].short_readings.len()
        )));
    }

    let use_hash = match index {
        SearchIndex::WindowScan => false,
        SearchIndex::SpatialHash => true,
        SearchIndex::Auto => {
            let span = log.last().map_or(0.0, |r| r.t) - first.t;
            span > 0.0 && 2.0 * spec.window * log.len() as f64 / span > HASH_THRESHOLD
        }
    };
    let hash = use_hash.then(|| SpatialHash::new(log, spec.delta));

    let instances = log
        .par_iter()
        .filter_map(|rec| {
            let (lo, hi) = window_bounds(log, rec.t, spec.window);
            let n_labels = targets.len() * m;
            let mut labels = vec![0u8; n_labels];
            let mut mask = vec![0u8; n_labels];
            for (j, target) in targets.poses.iter().enumerate() {
                let goal = rec.pose.compose(target);
                let mut best: Option<Candidate> = None;
                let mut consider = |i: usize| {
                    let c = Candidate {
                        distance: pose_distance(&log[i].pose, &goal, &spec.distance),
                        offset: (log[i].t - rec.t).abs(),
                        index: i,
                    };
                    if best.is_none_or(|b| c.better_than(&b)) {
                        best = Some(c);
                    }
                };
                match &hash {
                    Some(h) => h.for_each_near(goal.x, goal.y, lo, hi, &mut consider),
                    None => (lo..hi).for_each(&mut consider),
                }
                if let Some(b) = best.filter(|b| b.distance <= spec.delta) {
                    for (i, &s) in log[b.index].short_readings.iter().enumerate() {
                        labels[j * m + i] = s;
                        mask[j * m + i] = 1;
                    }
                }
            }
            mask.contains(&1).then(|| LabeledInstance {
                input: rec.long_reading.iter().map(|&v| v as f32).collect(),
                labels,
                mask,
                source: InstanceSource {
                    scenario: 0,
                    t: rec.t,
                },
            })
        })
        .collect();
    Ok(instances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{PoseDistanceSpec, Pose2};

    fn rec(t: f64, x: f64, y: f64, th: f64, s: u8) -> TrajectoryRecord {
        TrajectoryRecord {
            t,
            pose: Pose2::new(x, y, th),
            short_readings: vec![s, 1 - s],
            long_reading: vec![t, x],
        }
    }

    #[test]
    fn identity_target_always_known() {
        let log: Vec<_> = (0..50)
            .map(|k| rec(k as f64 * 0.1, k as f64 * 0.013, 0.0, 0.0, (k % 3 == 0) as u8))
            .collect();
        let targets = TargetPoseSet::column(vec![Pose2::IDENTITY, Pose2::new(0.05, 0.0, 0.0)]).unwrap();
        let spec = MatchSpec::thymio_line();
        let out = generate_instances(&log, &targets, &spec).unwrap();
        assert_eq!(out.len(), 50);
        for (k, inst) in out.iter().enumerate() {
            assert_eq!(&inst.mask[..2], &[1, 1]);
            assert_eq!(&inst.labels[..2], &log[k].short_readings[..]);
            assert_eq!(inst.input, vec![log[k].t as f32, log[k].pose.x as f32]);
        }
    }

    #[test]
    fn stationary_robot_never_reaches_far_target() {
        let log: Vec<_> = (0..100).map(|k| rec(k as f64, 1.0, 1.0, 0.3, 1)).collect();
        let targets = TargetPoseSet::column(vec![Pose2::IDENTITY, Pose2::new(2.0, 0.0, 0.0)]).unwrap();
        let out = generate_instances(&log, &targets, &MatchSpec::grid17()).unwrap();
        assert_eq!(out.len(), 100);
        assert!(out.iter().all(|i| i.mask[2..] == [0, 0] && i.labels[2..] == [0, 0]));

        let only_far = TargetPoseSet::column(vec![Pose2::new(2.0, 0.0, 0.0)]).unwrap();
        assert!(generate_instances(&log, &only_far, &MatchSpec::grid17()).unwrap().is_empty());
    }

    #[test]
    fn future_and_past_both_match() {
        // robot drives +x; target 0.5 m behind is reached in the past
        let log: Vec<_> = (0..40)
            .map(|k| rec(k as f64 * 0.1, k as f64 * 0.05, 0.0, 0.0, (k >= 20) as u8))
            .collect();
        let targets = TargetPoseSet::column(vec![Pose2::new(-0.5, 0.0, 0.0)]).unwrap();
        let spec = MatchSpec {
            delta: 0.01,
            window: 100.0,
            distance: PoseDistanceSpec::default(),
        };
        let out = generate_instances(&log, &targets, &spec).unwrap();
        assert_eq!(out.len(), 30);
        assert_eq!(out[0].source.t, 1.0);
    }

    #[test]
    fn tie_breaks_prefer_temporal_closeness() {
        // robot at the same spot at t=0, 1, 3; target is the identity at t=2
        let log = vec![
            rec(0.0, 0.0, 0.0, 0.0, 0),
            rec(1.0, 0.0, 0.0, 0.0, 1),
            rec(2.0, 5.0, 0.0, 0.0, 0),
            rec(3.0, 0.0, 0.0, 0.0, 0),
        ];
        let targets = TargetPoseSet::column(vec![Pose2::new(-5.0, 0.0, 0.0)]).unwrap();
        let spec = MatchSpec {
            delta: 0.1,
            window: 10.0,
            distance: PoseDistanceSpec::default(),
        };
        for index in [SearchIndex::WindowScan, SearchIndex::SpatialHash] {
            let out = generate_instances_with(&log, &targets, &spec, index).unwrap();
            let at2 = out.iter().find(|i| i.source.t == 2.0).unwrap();
            // t=1 and t=3 are equally close in time; the earlier wins
            assert_eq!(at2.labels, vec![1, 0]);
        }
    }

    #[test]
    fn unsorted_log_rejected() {
        let log = vec![rec(1.0, 0.0, 0.0, 0.0, 0), rec(0.5, 0.0, 0.0, 0.0, 0)];
        let err = generate_instances(&log, &TargetPoseSet::thymio_line(), &MatchSpec::thymio_line());
        assert!(matches!(err, Err(DatasetError::UnsortedLog { index: 1 })));
    }

    #[test]
    fn empty_log_is_empty() {
        let out = generate_instances(&[], &TargetPoseSet::grid17(), &MatchSpec::grid17()).unwrap();
        assert!(out.is_empty());
    }
}
