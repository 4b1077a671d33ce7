use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::noise::gradient_noise;
use super::SimError;

/// Square floor centered on the origin whose color is a thresholded
/// gradient-noise field. The field is defined over the whole plane; only the
/// floor sensor is restricted to the arena.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorWorld {
    pub size: f64,
    pub noise_frequency: f64,
    pub threshold: f64,
    pub seed: u64,
}

pub fn generate_floor_world(
    seed: u64,
    size: f64,
    noise_frequency: f64,
    threshold: f64,
) -> Result<FloorWorld, SimError> {
    if !(size > 0.0) || !size.is_finite() {
        return Err(SimError::InvalidWorld(format!("size must be positive, got {size}")));
    }
    if !(noise_frequency > 0.0) || !noise_frequency.is_finite() {
        return Err(SimError::InvalidWorld(format!(
            "noise frequency must be positive, got {noise_frequency}"
        )));
    }
    if threshold.is_nan() {
        return Err(SimError::InvalidWorld("threshold is NaN".into()));
    }
    Ok(FloorWorld {
        size,
        noise_frequency,
        threshold,
        seed,
    })
}

impl FloorWorld {
    pub fn noise(&self, x: f64, y: f64) -> f64 {
        gradient_noise(
            self.seed,
            x * self.noise_frequency,
            y * self.noise_frequency,
        )
    }

    /// 1 for bright floor, 0 for dark. Defined everywhere on the plane.
    pub fn brightness(&self, x: f64, y: f64) -> u8 {
        u8::from(self.noise(x, y) > self.threshold)
    }

    pub fn half_size(&self) -> f64 {
        self.size / 2.0
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let h = self.half_size();
        x.abs() <= h && y.abs() <= h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstacle {
    Circle {
        center: [f64; 2],
        radius: f64,
        albedo: f64,
    },
    /// Convex polygon, counter-clockwise vertex order.
    Polygon { vertices: Vec<[f64; 2]>, albedo: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub albedo: f64,
}

fn cross(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}

impl Obstacle {
    pub fn axis_aligned_box(cx: f64, cy: f64, half_w: f64, half_h: f64, albedo: f64) -> Self {
        Obstacle::Polygon {
            vertices: vec![
                [cx - half_w, cy - half_h],
                [cx + half_w, cy - half_h],
                [cx + half_w, cy + half_h],
                [cx - half_w, cy + half_h],
            ],
            albedo,
        }
    }

    pub fn albedo(&self) -> f64 {
        match self {
            Obstacle::Circle { albedo, .. } | Obstacle::Polygon { albedo, .. } => *albedo,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Obstacle::Circle { center, radius, .. } => {
                let dx = x - center[0];
                let dy = y - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Obstacle::Polygon { vertices, .. } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    cross(q[0] - p[0], q[1] - p[1], x - p[0], y - p[1]) >= 0.0
                })
            }
        }
    }

    /// Distance along the unit ray `(ox, oy) + t (dx, dy)` to the first
    /// boundary crossing; zero when the origin is inside.
    pub fn ray_distance(&self, ox: f64, oy: f64, dx: f64, dy: f64) -> Option<f64> {
        match self {
            Obstacle::Circle { center, radius, .. } => {
                let ocx = ox - center[0];
                let ocy = oy - center[1];
                let c = ocx * ocx + ocy * ocy - radius * radius;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let b = ocx * dx + ocy * dy;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let t = -b - disc.sqrt();
                (t >= 0.0).then_some(t)
            }
            Obstacle::Polygon { vertices, .. } => {
                if self.contains(ox, oy) {
                    return Some(0.0);
                }
                let n = vertices.len();
                let mut best: Option<f64> = None;
                for i in 0..n {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    let ex = q[0] - p[0];
                    let ey = q[1] - p[1];
                    let denom = cross(dx, dy, ex, ey);
                    if denom.abs() < 1e-15 {
                        continue;
                    }
                    let wx = p[0] - ox;
                    let wy = p[1] - oy;
                    let t = cross(wx, wy, ex, ey) / denom;
                    let u = cross(wx, wy, dx, dy) / denom;
                    if t >= 0.0 && (0.0..=1.0).contains(&u) {
                        best = Some(best.map_or(t, |b: f64| b.min(t)));
                    }
                }
                best
            }
        }
    }
}

/// Walled square arena centered on the origin with static obstacles.
/// With `walls == false` the arena is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleWorld {
    pub size: f64,
    pub walls: bool,
    pub wall_albedo: f64,
    pub obstacles: Vec<Obstacle>,
    pub seed: u64,
}

impl ObstacleWorld {
    /// An empty world without walls.
    pub fn unbounded() -> Self {
        Self {
            size: f64::INFINITY,
            walls: false,
            wall_albedo: 0.0,
            obstacles: Vec::new(),
            seed: 0,
        }
    }

    pub fn empty_arena(size: f64) -> Self {
        Self {
            size,
            walls: true,
            wall_albedo: 0.5,
            obstacles: Vec::new(),
            seed: 0,
        }
    }

    pub fn half_size(&self) -> f64 {
        self.size / 2.0
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        if !self.walls {
            return true;
        }
        let h = self.half_size();
        x.abs() <= h && y.abs() <= h
    }

    /// True when the point is inside an obstacle or outside the walls.
    pub fn is_occupied(&self, x: f64, y: f64) -> bool {
        !self.contains(x, y) || self.obstacles.iter().any(|o| o.contains(x, y))
    }

    fn wall_distance(&self, ox: f64, oy: f64, dx: f64, dy: f64) -> Option<f64> {
        if !self.walls {
            return None;
        }
        if !self.contains(ox, oy) {
            return Some(0.0);
        }
        let h = self.half_size();
        let axis = |o: f64, d: f64| {
            if d > 0.0 {
                (h - o) / d
            } else if d < 0.0 {
                (-h - o) / d
            } else {
                f64::INFINITY
            }
        };
        Some(axis(ox, dx).min(axis(oy, dy)))
    }

    /// First hit along the ray at world heading `angle`, if any.
    pub fn cast_ray(&self, ox: f64, oy: f64, angle: f64) -> Option<RayHit> {
        let (dy, dx) = angle.sin_cos();
        let mut best = self.wall_distance(ox, oy, dx, dy).map(|distance| RayHit {
            distance,
            albedo: self.wall_albedo,
        });
        for o in &self.obstacles {
            if let Some(t) = o.ray_distance(ox, oy, dx, dy) {
                if best.is_none_or(|b| t < b.distance) {
                    best = Some(RayHit {
                        distance: t,
                        albedo: o.albedo(),
                    });
                }
            }
        }
        best
    }
}

/// Parameters of the random obstacle arenas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleWorldSpec {
    pub size: f64,
    pub min_obstacles: usize,
    pub max_obstacles: usize,
    pub min_radius: f64,
    pub max_radius: f64,
    /// Obstacles keep this clearance from the arena center (spawn point).
    pub spawn_clearance: f64,
}

impl Default for ObstacleWorldSpec {
    fn default() -> Self {
        Self {
            size: 5.0,
            min_obstacles: 10,
            max_obstacles: 20,
            min_radius: 0.05,
            max_radius: 0.3,
            spawn_clearance: 0.5,
        }
    }
}

/// Random circles and axis-aligned boxes strictly inside a walled arena.
pub fn generate_obstacle_world(
    seed: u64,
    spec: &ObstacleWorldSpec,
) -> Result<ObstacleWorld, SimError> {
    if !(spec.size > 0.0) || !spec.size.is_finite() {
        return Err(SimError::InvalidWorld(format!("size must be positive, got {}", spec.size)));
    }
    if spec.min_obstacles > spec.max_obstacles
        || !(spec.min_radius > 0.0)
        || spec.min_radius > spec.max_radius
    {
        return Err(SimError::InvalidWorld("inconsistent obstacle ranges".into()));
    }
    let h = spec.size / 2.0;
    if spec.max_radius * 2.0 >= h - spec.spawn_clearance {
        return Err(SimError::InvalidWorld("arena too small for obstacles".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(spec.min_obstacles..=spec.max_obstacles);
    let mut obstacles = Vec::with_capacity(count);
    while obstacles.len() < count {
        let r = rng.random_range(spec.min_radius..=spec.max_radius);
        let lim = h - r - 0.01;
        let cx = rng.random_range(-lim..lim);
        let cy = rng.random_range(-lim..lim);
        // bounding radius of a box is r√2
        if cx.hypot(cy) < spec.spawn_clearance + r * std::f64::consts::SQRT_2 {
            continue;
        }
        let albedo = rng.random_range(0.2..1.0);
        if rng.random_bool(0.5) {
            obstacles.push(Obstacle::Circle {
                center: [cx, cy],
                radius: r,
                albedo,
            });
        } else {
            let aspect = rng.random_range(0.5..1.0);
            let (hw, hh) = if rng.random_bool(0.5) {
                (r, r * aspect)
            } else {
                (r * aspect, r)
            };
            obstacles.push(Obstacle::axis_aligned_box(cx, cy, hw, hh, albedo));
        }
    }
    Ok(ObstacleWorld {
        size: spec.size,
        walls: true,
        wall_albedo: rng.random_range(0.2..1.0),
        obstacles,
        seed,
    })
}
