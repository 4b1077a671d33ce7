use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sensors::{read_floor_sensor, read_linescan_camera, read_patch_camera, read_proximity};
use super::world::{FloorWorld, ObstacleWorld};
use super::{step_robot, CameraKind, RobotState, SensorRig, SimError, TrajectoryRecord};
use crate::geom::{wrap_angle, Pose2};

/// Random-walk controller of the floor task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoamerConfig {
    pub linear_speed: f64,
    /// Angular speed is drawn from `[-max, max]`, rad/s.
    pub max_angular_speed: f64,
    pub change_period: f64,
    pub respawn_margin: f64,
    pub physics_rate: f64,
}

impl Default for RoamerConfig {
    fn default() -> Self {
        Self {
            linear_speed: 0.5,
            max_angular_speed: 15f64.to_radians(),
            change_period: 3.0,
            respawn_margin: 1.0,
            physics_rate: 100.0,
        }
    }
}

/// Approach-and-back-off controller of the obstacle task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcquisitionConfig {
    pub forward_speed: f64,
    pub turn_speed: f64,
    pub backup_distance: f64,
    /// Heading offsets visited after each detection, radians.
    pub offsets: Vec<f64>,
    pub physics_rate: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            forward_speed: 0.1,
            turn_speed: 1.0,
            backup_distance: 0.30,
            offsets: [-30.0f64, -15.0, 0.0, 15.0, 30.0]
                .iter()
                .map(|d| d.to_radians())
                .collect(),
            physics_rate: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcquisitionPhase {
    Forward,
    Rotate,
    Backup,
    Return,
    Escape,
}

/// Physics ticks per record and total record count.
fn schedule(duration: f64, rate: f64, physics_rate: f64) -> Result<(u64, usize), SimError> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(SimError::InvalidController(format!("bad duration {duration}")));
    }
    if !(rate > 0.0) || !(physics_rate > 0.0) {
        return Err(SimError::InvalidController("rates must be positive".into()));
    }
    let ratio = physics_rate / rate;
    let ticks = ratio.round();
    if ticks < 1.0 || (ratio - ticks).abs() > 1e-9 {
        return Err(SimError::InvalidController(format!(
            "physics rate {physics_rate} Hz is not a multiple of record rate {rate} Hz"
        )));
    }
    let n = (duration * rate + 1e-9).floor() as usize;
    Ok((ticks as u64, n))
}

pub fn run_roamer_controller(
    world: &FloorWorld,
    rig: &SensorRig,
    duration: f64,
    rate: f64,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>, SimError> {
    run_roamer_with(world, rig, &RoamerConfig::default(), duration, rate, seed)
}

pub fn run_roamer_with(
    world: &FloorWorld,
    rig: &SensorRig,
    config: &RoamerConfig,
    duration: f64,
    rate: f64,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>, SimError> {
    rig.validate()?;
    if rig.camera_kind != CameraKind::Patch {
        return Err(SimError::InvalidRig("roamer needs a patch camera".into()));
    }
    let (ticks_per_record, n_records) = schedule(duration, rate, config.physics_rate)?;
    let change_ticks = (config.change_period * config.physics_rate).round() as u64;
    if change_ticks == 0 {
        return Err(SimError::InvalidController("change period too short".into()));
    }
    let limit = world.half_size() - config.respawn_margin;
    if !(limit > 0.0) {
        return Err(SimError::InvalidController("respawn margin exceeds the arena".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_w = config.max_angular_speed;
    let sample_w = |rng: &mut ChaCha8Rng| rng.random_range(-max_w..=max_w);
    let mut state = RobotState {
        pose: Pose2::new(0.0, 0.0, rng.random_range(-PI..PI)),
        linear_speed: config.linear_speed,
        angular_speed: sample_w(&mut rng),
        clock: 0.0,
    };
    let dt = 1.0 / config.physics_rate;
    let mut tick: u64 = 0;
    let mut records = Vec::with_capacity(n_records);
    for k in 0..n_records {
        if k > 0 {
            for _ in 0..ticks_per_record {
                state = step_robot(&state, dt);
                tick += 1;
                state.clock = tick as f64 / config.physics_rate;
                if tick.is_multiple_of(change_ticks) {
                    state.angular_speed = sample_w(&mut rng);
                }
                if state.pose.x.abs() > limit || state.pose.y.abs() > limit {
                    state.pose = Pose2::new(0.0, 0.0, rng.random_range(-PI..PI));
                }
            }
        }
        records.push(TrajectoryRecord {
            t: k as f64 / rate,
            pose: state.pose,
            short_readings: vec![read_floor_sensor(world, &state.pose)?],
            long_reading: read_patch_camera(world, &state.pose, rig)?,
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Rotate { target: f64, phase: AcquisitionPhase },
    Move {
        remaining: f64,
        travelled: f64,
        direction: f64,
        phase: AcquisitionPhase,
    },
}

impl Action {
    fn phase(&self) -> AcquisitionPhase {
        match self {
            Action::Rotate { phase, .. } | Action::Move { phase, .. } => *phase,
        }
    }
}

pub fn run_acquisition_controller(
    world: &ObstacleWorld,
    rig: &SensorRig,
    duration: f64,
    rate: f64,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>, SimError> {
    run_acquisition_traced(world, rig, &AcquisitionConfig::default(), duration, rate, seed)
        .map(|(records, _)| records)
}

/// Runs the acquisition state machine and also returns the controller
/// phase active at each record.
///
/// Forward until a proximity sensor fires (or the next step would enter an
/// obstacle); then for each heading offset: rotate in place, back up, drive
/// back to the detection point; finally turn to a random heading in the
/// half-plane facing away from the triggering sensor ray.
pub fn run_acquisition_traced(
    world: &ObstacleWorld,
    rig: &SensorRig,
    config: &AcquisitionConfig,
    duration: f64,
    rate: f64,
    seed: u64,
) -> Result<(Vec<TrajectoryRecord>, Vec<AcquisitionPhase>), SimError> {
    rig.validate()?;
    if rig.camera_kind != CameraKind::Linescan {
        return Err(SimError::InvalidRig("acquisition needs a line camera".into()));
    }
    if rig.proximity_angles.is_empty() {
        return Err(SimError::InvalidRig("no proximity sensors".into()));
    }
    if !(config.forward_speed > 0.0 && config.turn_speed > 0.0 && config.backup_distance > 0.0) {
        return Err(SimError::InvalidController("speeds and distances must be positive".into()));
    }
    let (ticks_per_record, n_records) = schedule(duration, rate, config.physics_rate)?;
    let dt = 1.0 / config.physics_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pose = Pose2::new(0.0, 0.0, rng.random_range(-PI..PI));
    let mut plan: VecDeque<Action> = VecDeque::new();
    let mut records = Vec::with_capacity(n_records);
    let mut phases = Vec::with_capacity(n_records);

    let moved = |pose: &Pose2, distance: f64| {
        let (s, c) = pose.theta.sin_cos();
        Pose2::new(pose.x + distance * c, pose.y + distance * s, pose.theta)
    };

    for k in 0..n_records {
        if k > 0 {
            for _ in 0..ticks_per_record {
                if plan.is_empty() {
                    let prox = read_proximity(world, &pose, rig)?;
                    let next = moved(&pose, config.forward_speed * dt);
                    let trigger = if prox.contains(&1) {
                        Some(nearest_firing_sensor(world, &pose, rig, &prox))
                    } else if world.is_occupied(next.x, next.y) {
                        Some(pose.theta)
                    } else {
                        None
                    };
                    match trigger {
                        Some(ray) => {
                            plan = choreography(config, pose.theta, ray, &mut rng);
                        }
                        None => {
                            pose = next;
                            continue;
                        }
                    }
                }
                let front = plan.front_mut().expect("plan is non-empty");
                let done = match front {
                    Action::Rotate { target, .. } => {
                        let diff = wrap_angle(*target - pose.theta);
                        if diff.abs() <= config.turn_speed * dt {
                            pose = Pose2::new(pose.x, pose.y, *target);
                            true
                        } else {
                            let state = RobotState {
                                pose,
                                linear_speed: 0.0,
                                angular_speed: config.turn_speed * diff.signum(),
                                clock: 0.0,
                            };
                            pose = step_robot(&state, dt).pose;
                            false
                        }
                    }
                    Action::Move {
                        remaining,
                        travelled,
                        direction,
                        phase,
                    } => {
                        let step = (config.forward_speed * dt).min(*remaining);
                        let next = moved(&pose, *direction * step);
                        if *phase == AcquisitionPhase::Backup && world.is_occupied(next.x, next.y)
                        {
                            // blocked from behind: shorten this back-off and
                            // the matching return leg
                            let back = *travelled;
                            if let Some(Action::Move { remaining, .. }) = plan.get_mut(1) {
                                *remaining = back;
                            }
                            true
                        } else {
                            pose = next;
                            *remaining -= step;
                            *travelled += step;
                            *remaining <= 1e-12
                        }
                    }
                };
                if done {
                    plan.pop_front();
                }
            }
        }
        records.push(TrajectoryRecord {
            t: k as f64 / rate,
            pose,
            short_readings: read_proximity(world, &pose, rig)?,
            long_reading: read_linescan_camera(world, &pose, rig)?,
        });
        phases.push(plan.front().map_or(AcquisitionPhase::Forward, Action::phase));
    }
    Ok((records, phases))
}

fn nearest_firing_sensor(world: &ObstacleWorld, pose: &Pose2, rig: &SensorRig, prox: &[u8]) -> f64 {
    rig.proximity_angles
        .iter()
        .zip(prox)
        .filter(|(_, &p)| p == 1)
        .map(|(a, _)| {
            let ray = pose.theta + a;
            let d = world
                .cast_ray(pose.x, pose.y, ray)
                .map_or(f64::INFINITY, |h| h.distance);
            (d, ray)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, ray)| ray)
        .unwrap_or(pose.theta)
}

fn choreography(
    config: &AcquisitionConfig,
    heading: f64,
    trigger_ray: f64,
    rng: &mut ChaCha8Rng,
) -> VecDeque<Action> {
    let mut plan = VecDeque::with_capacity(config.offsets.len() * 3 + 1);
    for off in &config.offsets {
        plan.push_back(Action::Rotate {
            target: wrap_angle(heading + off),
            phase: AcquisitionPhase::Rotate,
        });
        for (direction, phase) in [(-1.0, AcquisitionPhase::Backup), (1.0, AcquisitionPhase::Return)] {
            plan.push_back(Action::Move {
                remaining: config.backup_distance,
                travelled: 0.0,
                direction,
                phase,
            });
        }
    }
    let away = trigger_ray + PI / 2.0 + rng.random::<f64>() * PI;
    plan.push_back(Action::Rotate {
        target: wrap_angle(away.rem_euclid(TAU)),
        phase: AcquisitionPhase::Escape,
    });
    plan
}
