//! Deterministic 2D simulator: worlds, unicycle kinematics, sensor models
//! and the data-collection controllers.

mod controller;
pub mod noise;
mod sensors;
mod world;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Pose2;

pub use controller::{
    run_acquisition_controller, run_acquisition_traced, run_roamer_controller, run_roamer_with,
    AcquisitionConfig, AcquisitionPhase, RoamerConfig,
};
pub use sensors::{
    read_camera, read_floor_sensor, read_linescan_camera, read_patch_camera, read_proximity,
    CameraKind, CameraLayout, SceneRef, SensorRig,
};
pub use world::{
    generate_floor_world, generate_obstacle_world, FloorWorld, Obstacle, ObstacleWorld,
    ObstacleWorldSpec, RayHit,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("position ({x:.3}, {y:.3}) is outside the arena")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("invalid sensor rig: {0}")]
    InvalidRig(String),
    #[error("invalid controller setting: {0}")]
    InvalidController(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub pose: Pose2,
    pub linear_speed: f64,
    pub angular_speed: f64,
    pub clock: f64,
}

/// Exact unicycle integration over `dt` at constant speeds.
pub fn step_robot(state: &RobotState, dt: f64) -> RobotState {
    assert!(dt > 0.0, "dt must be positive");
    let RobotState {
        pose,
        linear_speed: v,
        angular_speed: w,
        clock,
    } = *state;
    let theta1 = pose.theta + w * dt;
    let (x, y) = if w.abs() < 1e-9 {
        let (s, c) = pose.theta.sin_cos();
        (pose.x + v * dt * c, pose.y + v * dt * s)
    } else {
        let r = v / w;
        (
            pose.x + r * (theta1.sin() - pose.theta.sin()),
            pose.y - r * (theta1.cos() - pose.theta.cos()),
        )
    };
    RobotState {
        pose: Pose2::new(x, y, theta1),
        linear_speed: v,
        angular_speed: w,
        clock: clock + dt,
    }
}

/// One row of a collection log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub pose: Pose2,
    #[serde(rename = "short")]
    pub short_readings: Vec<u8>,
    #[serde(rename = "long")]
    pub long_reading: Vec<f64>,
}
