//! Planar rigid-body poses and the distance used for target-pose matching.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// A pose in SE(2). Heading is kept normalized to `(-π, π]`.
///
/// Serializes as the 3-array `[x, y, theta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    /// `self ⊕ other`: `other` is expressed in this pose's frame.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )
    }

    pub fn inverse(&self) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2::new(
            -c * self.x - s * self.y,
            s * self.x - c * self.y,
            -self.theta,
        )
    }

    /// `other` expressed in this pose's frame, so that
    /// `self.compose(&self.relative(other)) == other`.
    pub fn relative(&self, other: &Pose2) -> Pose2 {
        self.inverse().compose(other)
    }

    /// Maps a point given in this pose's frame to the world frame.
    pub fn transform_point(&self, px: f64, py: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (self.x + c * px - s * py, self.y + s * px + c * py)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.theta]
    }
}

impl Default for Pose2 {
    fn default() -> Self {
        Pose2::IDENTITY
    }
}

impl From<[f64; 3]> for Pose2 {
    fn from(a: [f64; 3]) -> Self {
        Pose2::new(a[0], a[1], a[2])
    }
}

impl Serialize for Pose2 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pose2 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        <[f64; 3]>::deserialize(deserializer).map(Pose2::from)
    }
}

pub fn compose(a: &Pose2, b: &Pose2) -> Pose2 {
    a.compose(b)
}

pub fn inverse(a: &Pose2) -> Pose2 {
    a.inverse()
}

pub fn relative(a: &Pose2, b: &Pose2) -> Pose2 {
    a.relative(b)
}

/// How angular error is folded into the matching distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoseDistanceSpec {
    /// Meters of equivalent translation per radian of heading error.
    pub angular_weight: f64,
    pub ignore_orientation: bool,
}

impl Default for PoseDistanceSpec {
    fn default() -> Self {
        Self {
            angular_weight: 0.1,
            ignore_orientation: false,
        }
    }
}

impl PoseDistanceSpec {
    pub fn position_only() -> Self {
        Self {
            angular_weight: 0.0,
            ignore_orientation: true,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.angular_weight >= 0.0 && self.angular_weight.is_finite()
    }
}

/// Euclidean position error plus weighted absolute wrapped heading error.
pub fn pose_distance(a: &Pose2, b: &Pose2, spec: &PoseDistanceSpec) -> f64 {
    let d = (a.x - b.x).hypot(a.y - b.y);
    if spec.ignore_orientation {
        d
    } else {
        d + spec.angular_weight * wrap_angle(a.theta - b.theta).abs()
    }
}
