//! Shared helpers for the integration tests: random logs and a brute-force
//! label matcher used as an oracle.

#![allow(dead_code)]

use longrange::dataset::{InstanceSource, LabeledInstance, MatchSpec, TargetPoseSet};
use longrange::geom::{pose_distance, Pose2, PoseDistanceSpec};
use longrange::sim::TrajectoryRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// O(T^2 n) matcher: every record scans the whole log.
pub fn brute_force_instances(
    log: &[TrajectoryRecord],
    targets: &TargetPoseSet,
    spec: &MatchSpec,
) -> Vec<LabeledInstance> {
    let mut out = Vec::new();
    for rec in log {
        let m = rec.short_readings.len();
        let mut labels = vec![0u8; targets.len() * m];
        let mut mask = vec![0u8; targets.len() * m];
        for (j, target) in targets.poses.iter().enumerate() {
            let goal = rec.pose.compose(target);
            let mut best: Option<(f64, f64, usize)> = None;
            for (k, other) in log.iter().enumerate() {
                if other.t < rec.t - spec.window || other.t > rec.t + spec.window {
                    continue;
                }
                let key = (
                    pose_distance(&other.pose, &goal, &spec.distance),
                    (other.t - rec.t).abs(),
                    k,
                );
                let better = match best {
                    None => true,
                    Some(b) => key.0 < b.0 || (key.0 == b.0 && (key.1 < b.1 || (key.1 == b.1 && key.2 < b.2))),
                };
                if better {
                    best = Some(key);
                }
            }
            if let Some((d, _, k)) = best {
                if d <= spec.delta {
                    for i in 0..m {
                        labels[j * m + i] = log[k].short_readings[i];
                        mask[j * m + i] = 1;
                    }
                }
            }
        }
        if mask.contains(&1) {
            out.push(LabeledInstance {
                input: rec.long_reading.iter().map(|&v| v as f32).collect(),
                labels,
                mask,
                source: InstanceSource { scenario: 0, t: rec.t },
            });
        }
    }
    out
}

/// A random unicycle-ish walk. Poses are sometimes snapped to a coarse
/// lattice and timestamps sometimes repeat, so exact ties occur.
pub fn random_log(rng: &mut ChaCha8Rng, len: usize, sensors: usize) -> Vec<TrajectoryRecord> {
    let snap = rng.random_bool(0.3);
    let mut t = 0.0;
    let mut pose = Pose2::new(0.0, 0.0, rng.random_range(-3.0..3.0));
    (0..len)
        .map(|_| {
            if rng.random_bool(0.9) {
                t += rng.random_range(0.01..0.3);
            }
            let step = rng.random_range(0.0..0.08);
            let turn = rng.random_range(-0.6..0.6);
            pose = pose.compose(&Pose2::new(step, 0.0, turn));
            let p = if snap {
                let q = |v: f64| (v / 0.05).round() * 0.05;
                Pose2::new(q(pose.x), q(pose.y), pose.theta)
            } else {
                pose
            };
            TrajectoryRecord {
                t,
                pose: p,
                short_readings: (0..sensors).map(|_| rng.random_bool(0.4) as u8).collect(),
                long_reading: vec![t, p.x, p.y],
            }
        })
        .collect()
}

pub fn random_targets(rng: &mut ChaCha8Rng) -> TargetPoseSet {
    let n = rng.random_range(1..=6);
    let poses = (0..n)
        .map(|_| {
            Pose2::new(
                rng.random_range(-0.4..0.4),
                rng.random_range(-0.4..0.4),
                rng.random_range(-3.0..3.0),
            )
        })
        .collect();
    TargetPoseSet::column(poses).unwrap()
}

pub fn random_spec(rng: &mut ChaCha8Rng) -> MatchSpec {
    let distance = if rng.random_bool(0.5) {
        PoseDistanceSpec::position_only()
    } else {
        PoseDistanceSpec {
            angular_weight: rng.random_range(0.0..0.3),
            ignore_orientation: false,
        }
    };
    MatchSpec {
        delta: rng.random_range(0.005..0.2),
        window: rng.random_range(0.2..20.0),
        distance,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
