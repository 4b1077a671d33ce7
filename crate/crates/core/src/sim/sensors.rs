//! Short-range and long-range sensor models.

use serde::{Deserialize, Serialize};

use super::world::{FloorWorld, ObstacleWorld};
use super::SimError;
use crate::geom::Pose2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraKind {
    /// Samples the floor on a trapezoidal ground patch per mounted camera.
    Patch,
    /// One row of depth rays across the field of view, plus an albedo channel.
    Linescan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorRig {
    /// Proximity sensor yaws relative to the heading, radians.
    pub proximity_angles: Vec<f64>,
    pub proximity_range: f64,
    pub camera_kind: CameraKind,
    pub camera_mount_yaws: Vec<f64>,
    pub camera_fov: f64,
    /// (width, height) in cells.
    pub camera_resolution: (usize, usize),
    pub patch_near: f64,
    pub patch_far: f64,
    pub linescan_max_range: f64,
}

impl Default for SensorRig {
    fn default() -> Self {
        Self {
            proximity_angles: [-40.0f64, -20.0, 0.0, 20.0, 40.0]
                .iter()
                .map(|d| d.to_radians())
                .collect(),
            proximity_range: 0.075,
            camera_kind: CameraKind::Patch,
            camera_mount_yaws: vec![0.0],
            camera_fov: 68f64.to_radians(),
            camera_resolution: (12, 16),
            patch_near: 0.3,
            patch_far: 5.0,
            linescan_max_range: 0.30,
        }
    }
}

/// Shape of the flattened long-range reading: rows, columns and channels,
/// stored row-major with interleaved channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CameraLayout {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl CameraLayout {
    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.width + col) * self.channels + channel
    }
}

impl SensorRig {
    /// Floor task rig: patch cameras at the given mount yaws.
    pub fn floor_patch(mount_yaws: Vec<f64>) -> Self {
        Self {
            camera_kind: CameraKind::Patch,
            camera_mount_yaws: mount_yaws,
            ..Self::default()
        }
    }

    /// Obstacle task rig: a single forward line camera with `width` rays.
    pub fn obstacle_linescan(width: usize) -> Self {
        Self {
            camera_kind: CameraKind::Linescan,
            camera_mount_yaws: vec![0.0],
            camera_resolution: (width, 1),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidRig(m.to_string()));
        if !(self.proximity_range > 0.0) {
            return bad("proximity_range must be positive");
        }
        if !(self.camera_fov > 0.0 && self.camera_fov < std::f64::consts::PI) {
            return bad("camera_fov must lie in (0, pi)");
        }
        if self.camera_resolution.0 == 0 || self.camera_resolution.1 == 0 {
            return bad("camera resolution must be at least 1x1");
        }
        if self.camera_mount_yaws.is_empty() {
            return bad("at least one camera is required");
        }
        match self.camera_kind {
            CameraKind::Patch => {
                if !(self.patch_near >= 0.0 && self.patch_far > self.patch_near) {
                    return bad("patch needs 0 <= near < far");
                }
            }
            CameraKind::Linescan => {
                if !(self.linescan_max_range > 0.0) {
                    return bad("linescan_max_range must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> CameraLayout {
        let (w, h) = self.camera_resolution;
        match self.camera_kind {
            CameraKind::Patch => CameraLayout {
                height: h,
                width: w,
                channels: self.camera_mount_yaws.len(),
            },
            CameraKind::Linescan => CameraLayout {
                height: 1,
                width: w * self.camera_mount_yaws.len(),
                channels: 2,
            },
        }
    }

    /// Yaw offset of a linescan column relative to the camera axis.
    /// Column 0 is the leftmost (most counter-clockwise) ray.
    pub fn linescan_ray_angle(&self, col: usize) -> f64 {
        let w = self.camera_resolution.0 as f64;
        self.camera_fov / 2.0 - self.camera_fov * (col as f64 + 0.5) / w
    }

    /// Ground point sampled by patch cell `(row, col)` in the camera frame.
    /// Row 0 is the far edge, column 0 the left edge.
    pub fn patch_cell_point(&self, row: usize, col: usize) -> (f64, f64) {
        let (w, h) = self.camera_resolution;
        let r = self.patch_near
            + (self.patch_far - self.patch_near) * (1.0 - (row as f64 + 0.5) / h as f64);
        let half = (self.camera_fov / 2.0).tan() * r;
        let lateral = half * (1.0 - 2.0 * (col as f64 + 0.5) / w as f64);
        (r, lateral)
    }

    /// Corners of the imaged ground trapezoid of the camera at `yaw`, in
    /// the robot frame, counter-clockwise.
    pub fn patch_footprint(&self, yaw: f64) -> [(f64, f64); 4] {
        let t = (self.camera_fov / 2.0).tan();
        let mount = Pose2::new(0.0, 0.0, yaw);
        let (n, f) = (self.patch_near, self.patch_far);
        [
            mount.transform_point(n, -n * t),
            mount.transform_point(f, -f * t),
            mount.transform_point(f, f * t),
            mount.transform_point(n, n * t),
        ]
    }

    /// Distance from a robot-frame point to the union of all camera
    /// footprints; zero inside.
    pub fn distance_to_footprints(&self, x: f64, y: f64) -> f64 {
        self.camera_mount_yaws
            .iter()
            .map(|&yaw| distance_to_convex_polygon(&self.patch_footprint(yaw), x, y))
            .fold(f64::INFINITY, f64::min)
    }
}

fn distance_to_convex_polygon(poly: &[(f64, f64)], x: f64, y: f64) -> f64 {
    let n = poly.len();
    let inside = (0..n).all(|i| {
        let (px, py) = poly[i];
        let (qx, qy) = poly[(i + 1) % n];
        (qx - px) * (y - py) - (qy - py) * (x - px) >= 0.0
    });
    if inside {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let (px, py) = poly[i];
            let (qx, qy) = poly[(i + 1) % n];
            let (ex, ey) = (qx - px, qy - py);
            let len2 = ex * ex + ey * ey;
            let s = if len2 > 0.0 {
                (((x - px) * ex + (y - py) * ey) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (x - px - s * ex).hypot(y - py - s * ey)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn read_floor_sensor(world: &FloorWorld, pose: &Pose2) -> Result<u8, SimError> {
    if !world.contains(pose.x, pose.y) {
        return Err(SimError::OutOfBounds {
            x: pose.x,
            y: pose.y,
        });
    }
    Ok(world.brightness(pose.x, pose.y))
}

/// One binary reading per proximity sensor: 1 iff the first hit along the
/// sensor ray is within range.
pub fn read_proximity(
    world: &ObstacleWorld,
    pose: &Pose2,
    rig: &SensorRig,
) -> Result<Vec<u8>, SimError> {
    if !world.contains(pose.x, pose.y) {
        return Err(SimError::OutOfBounds {
            x: pose.x,
            y: pose.y,
        });
    }
    Ok(rig
        .proximity_angles
        .iter()
        .map(|a| {
            let hit = world.cast_ray(pose.x, pose.y, pose.theta + a);
            u8::from(hit.is_some_and(|h| h.distance <= rig.proximity_range))
        })
        .collect())
}

/// World the long-range sensor looks at.
#[derive(Debug, Clone, Copy)]
pub enum SceneRef<'a> {
    Floor(&'a FloorWorld),
    Obstacles(&'a ObstacleWorld),
}

pub fn read_camera(scene: SceneRef<'_>, pose: &Pose2, rig: &SensorRig) -> Result<Vec<f64>, SimError> {
    match (scene, rig.camera_kind) {
        (SceneRef::Floor(w), CameraKind::Patch) => read_patch_camera(w, pose, rig),
        (SceneRef::Obstacles(w), CameraKind::Linescan) => read_linescan_camera(w, pose, rig),
        _ => Err(SimError::InvalidRig(
            "camera kind does not match the world type".into(),
        )),
    }
}

pub fn read_patch_camera(
    world: &FloorWorld,
    pose: &Pose2,
    rig: &SensorRig,
) -> Result<Vec<f64>, SimError> {
    if !world.contains(pose.x, pose.y) {
        return Err(SimError::OutOfBounds {
            x: pose.x,
            y: pose.y,
        });
    }
    let layout = rig.layout();
    let mut out = vec![0.0; layout.len()];
    for (ch, &yaw) in rig.camera_mount_yaws.iter().enumerate() {
        let cam = pose.compose(&Pose2::new(0.0, 0.0, yaw));
        for row in 0..layout.height {
            for col in 0..layout.width {
                let (px, py) = rig.patch_cell_point(row, col);
                let (wx, wy) = cam.transform_point(px, py);
                out[layout.index(row, col, ch)] = world.brightness(wx, wy) as f64;
            }
        }
    }
    Ok(out)
}

/// Channel 0 is `clamp(1 - d / max_range, 0, 1)`, channel 1 the albedo of
/// the hit surface when it lies within range, else 0.
pub fn read_linescan_camera(
    world: &ObstacleWorld,
    pose: &Pose2,
    rig: &SensorRig,
) -> Result<Vec<f64>, SimError> {
    if !world.contains(pose.x, pose.y) {
        return Err(SimError::OutOfBounds {
            x: pose.x,
            y: pose.y,
        });
    }
    let layout = rig.layout();
    let w = rig.camera_resolution.0;
    let max = rig.linescan_max_range;
    let mut out = vec![0.0; layout.len()];
    for (cam, &yaw) in rig.camera_mount_yaws.iter().enumerate() {
        for col in 0..w {
            let angle = pose.theta + yaw + rig.linescan_ray_angle(col);
            let c = cam * w + col;
            if let Some(hit) = world.cast_ray(pose.x, pose.y, angle) {
                if hit.distance <= max {
                    out[layout.index(0, c, 0)] = (1.0 - hit.distance / max).clamp(0.0, 1.0);
                    out[layout.index(0, c, 1)] = hit.albedo;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::world::{generate_floor_world, generate_obstacle_world, Obstacle, ObstacleWorldSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn floor_sensor_examples() {
        let w = generate_floor_world(3, 50.0, 0.3, 0.0).unwrap();
        let mut found_bright = false;
        for k in 0..200 {
            let x = -20.0 + k as f64 * 0.2;
            let p = Pose2::new(x, 1.3, 0.0);
            let a = read_floor_sensor(&w, &p).unwrap();
            let b = read_floor_sensor(&w, &Pose2::new(x, 1.3, 2.0)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, u8::from(w.noise(x, 1.3) > 0.0));
            found_bright |= a == 1;
        }
        assert!(found_bright);
        assert!(matches!(
            read_floor_sensor(&w, &Pose2::new(30.0, 0.0, 0.0)),
            Err(SimError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn uniform_floor_patch_is_bright() {
        let w = generate_floor_world(3, 50.0, 0.05, f64::NEG_INFINITY).unwrap();
        let rig = SensorRig::floor_patch(vec![-0.5, 0.0, 0.7]);
        let img = read_camera(SceneRef::Floor(&w), &Pose2::new(1.0, 2.0, 0.4), &rig).unwrap();
        assert_eq!(img.len(), 12 * 16 * 3);
        assert!(img.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn patch_samples_the_field() {
        let w = generate_floor_world(8, 50.0, 0.4, 0.0).unwrap();
        let rig = SensorRig::floor_patch(vec![0.3]);
        let pose = Pose2::new(-3.0, 4.0, 1.0);
        let img = read_patch_camera(&w, &pose, &rig).unwrap();
        let layout = rig.layout();
        let cam = pose.compose(&Pose2::new(0.0, 0.0, 0.3));
        for row in 0..layout.height {
            for col in 0..layout.width {
                let (px, py) = rig.patch_cell_point(row, col);
                let (wx, wy) = cam.transform_point(px, py);
                assert_eq!(img[layout.index(row, col, 0)], w.brightness(wx, wy) as f64);
                let (rx, ry) = Pose2::new(0.0, 0.0, 0.3).transform_point(px, py);
                assert_eq!(rig.distance_to_footprints(rx, ry), 0.0);
            }
        }
    }

    #[test]
    fn footprint_distance() {
        let rig = SensorRig::floor_patch(vec![0.0]);
        assert_eq!(rig.distance_to_footprints(1.0, 0.0), 0.0);
        assert!((rig.distance_to_footprints(-1.7, 0.0) - 2.0).abs() < 1e-12);
        assert!((rig.distance_to_footprints(6.0, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn proximity_empty_and_wall() {
        let rig = SensorRig::obstacle_linescan(33);
        let w = ObstacleWorld::empty_arena(5.0);
        assert_eq!(read_proximity(&w, &Pose2::IDENTITY, &rig).unwrap(), vec![0; 5]);
        let p = Pose2::new(2.45, 0.0, 0.0);
        let r = read_proximity(&w, &p, &rig).unwrap();
        assert_eq!(r[2], 1);
        let far = Pose2::new(2.4, 0.0, 0.0);
        assert_eq!(read_proximity(&w, &far, &rig).unwrap()[2], 0);
    }

    #[test]
    fn linescan_empty_world_is_zero() {
        let rig = SensorRig::obstacle_linescan(33);
        let w = ObstacleWorld::empty_arena(5.0);
        let img = read_camera(SceneRef::Obstacles(&w), &Pose2::IDENTITY, &rig).unwrap();
        assert_eq!(img.len(), 66);
        assert!(img.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linescan_matches_analytic_circle() {
        let rig = SensorRig::obstacle_linescan(33);
        let mut w = ObstacleWorld::empty_arena(5.0);
        let (cx, cy, r) = (0.2, 0.01, 0.05);
        w.obstacles.push(Obstacle::Circle {
            center: [cx, cy],
            radius: r,
            albedo: 0.7,
        });
        let img = read_linescan_camera(&w, &Pose2::IDENTITY, &rig).unwrap();
        let layout = rig.layout();
        let mut covered = 0;
        for col in 0..33 {
            let a = rig.linescan_ray_angle(col);
            let (dy, dx) = a.sin_cos();
            // ray-circle quadratic t^2 - 2 t (d.c) + |c|^2 - r^2 = 0
            let b = dx * cx + dy * cy;
            let disc = b * b - (cx * cx + cy * cy - r * r);
            let depth = img[layout.index(0, col, 0)];
            if disc >= 0.0 {
                let t = b - disc.sqrt();
                assert!((depth - (1.0 - t / 0.3)).abs() < 1e-12);
                assert_eq!(img[layout.index(0, col, 1)], 0.7);
                covered += 1;
            } else {
                assert_eq!(depth, 0.0);
            }
        }
        assert!(covered >= 3);
    }

    /// Dense 1 mm ray-marching oracle.
    fn ray_march(world: &ObstacleWorld, x: f64, y: f64, angle: f64, max: f64) -> Option<f64> {
        let (s, c) = angle.sin_cos();
        let mut t = 0.0;
        while t <= max {
            if world.is_occupied(x + c * t, y + s * t) {
                return Some(t);
            }
            t += 1e-3;
        }
        None
    }

    #[test]
    fn proximity_matches_ray_marching() {
        let rig = SensorRig::obstacle_linescan(33);
        let spec = ObstacleWorldSpec::default();
        let mut checked = 0;
        for seed in 0..30u64 {
            let w = generate_obstacle_world(seed, &spec).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            let mut n = 0;
            while n < 60 {
                // sample near obstacles so positives occur
                let o = &w.obstacles[rng.random_range(0..w.obstacles.len())];
                let (ox, oy) = match o {
                    Obstacle::Circle { center, .. } => (center[0], center[1]),
                    Obstacle::Polygon { vertices, .. } => (vertices[0][0], vertices[0][1]),
                };
                let x = ox + rng.random_range(-0.4..0.4);
                let y = oy + rng.random_range(-0.4..0.4);
                if w.is_occupied(x, y) {
                    continue;
                }
                n += 1;
                let pose = Pose2::new(x, y, rng.random_range(-3.0..3.0));
                let got = read_proximity(&w, &pose, &rig).unwrap();
                for (i, a) in rig.proximity_angles.iter().enumerate() {
                    let exact = w.cast_ray(x, y, pose.theta + a).map(|h| h.distance);
                    if exact.is_some_and(|d| (d - rig.proximity_range).abs() < 2e-3) {
                        continue;
                    }
                    let marched = ray_march(&w, x, y, pose.theta + a, rig.proximity_range);
                    assert_eq!(got[i], u8::from(marched.is_some()), "seed {seed} pose {pose:?}");
                    if let (Some(m), Some(e)) = (marched, exact) {
                        assert!(m >= e - 1e-9 && m - e < 1.5e-3);
                    }
                    checked += 1;
                }
            }
        }
        assert!(checked > 5000);
    }

    #[test]
    fn center_proximity_implies_close_depth() {
        let rig = SensorRig::obstacle_linescan(33);
        let spec = ObstacleWorldSpec::default();
        let layout = rig.layout();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut positives = 0;
        for seed in 0..10 {
            let w = generate_obstacle_world(seed, &spec).unwrap();
            for _ in 0..2000 {
                let x = rng.random_range(-2.5..2.5);
                let y = rng.random_range(-2.5..2.5);
                if w.is_occupied(x, y) {
                    continue;
                }
                let pose = Pose2::new(x, y, rng.random_range(-3.2..3.2));
                let prox = read_proximity(&w, &pose, &rig).unwrap();
                if prox[2] == 1 {
                    positives += 1;
                    let img = read_linescan_camera(&w, &pose, &rig).unwrap();
                    assert!(img[layout.index(0, 16, 0)] >= 1.0 - 0.075 / 0.30 - 1e-12);
                }
            }
        }
        assert!(positives > 0);
    }

    #[test]
    fn rig_validation() {
        assert!(SensorRig::default().validate().is_ok());
        for rig in [
            SensorRig { camera_fov: 4.0, ..SensorRig::default() },
            SensorRig { proximity_range: 0.0, ..SensorRig::default() },
            SensorRig { camera_resolution: (0, 3), ..SensorRig::default() },
        ] {
            assert!(rig.validate().is_err());
        }
    }
}
