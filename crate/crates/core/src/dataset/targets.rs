use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::geom::{PoseDistanceSpec, Pose2};

/// Ordered target poses in the robot frame. The order fixes the label layout:
/// label `j * m + i` is sensor `i` at pose `j`.
///
/// `grid` arranges the poses for heatmaps: pose `j` sits at row `j / cols`,
/// column `j % cols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPoseSet {
    pub poses: Vec<Pose2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    pub grid: (usize, usize),
}

impl TargetPoseSet {
    pub fn new(poses: Vec<Pose2>, grid: (usize, usize)) -> Result<Self, DatasetError> {
        let set = Self {
            poses,
            names: None,
            grid,
        };
        set.validate()?;
        Ok(set)
    }

    /// Poses in a single heatmap column.
    pub fn column(poses: Vec<Pose2>) -> Result<Self, DatasetError> {
        let n = poses.len();
        Self::new(poses, (n, 1))
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.poses.is_empty() {
            return Err(DatasetError::InvalidTargets("at least one target pose is required".into()));
        }
        if self.grid.0 * self.grid.1 != self.poses.len() {
            return Err(DatasetError::InvalidTargets(format!(
                "grid {}x{} does not hold {} poses",
                self.grid.0,
                self.grid.1,
                self.poses.len()
            )));
        }
        if let Some(names) = &self.names {
            if names.len() != self.poses.len() {
                return Err(DatasetError::InvalidTargets("one name per pose".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// 31 poses straight ahead, 0 to 30 cm in 1 cm steps.
    pub fn thymio_line() -> Self {
        let poses = (0..=30)
            .map(|k| Pose2::new(k as f64 / 100.0, 0.0, 0.0))
            .collect::<Vec<_>>();
        Self {
            names: Some((0..=30).map(|k| format!("{k}cm")).collect()),
            grid: (poses.len(), 1),
            poses,
        }
    }

    /// 17x17 grid with 0.5 m spacing, 5 m ahead to 3 m behind and 4 m to
    /// either side. Row 0 is the front row, column 0 the leftmost.
    pub fn grid17() -> Self {
        let mut poses = Vec::with_capacity(289);
        for row in 0..17 {
            for col in 0..17 {
                poses.push(Pose2::new(
                    5.0 - 0.5 * row as f64,
                    4.0 - 0.5 * col as f64,
                    0.0,
                ));
            }
        }
        Self {
            poses,
            names: None,
            grid: (17, 17),
        }
    }
}

/// Tolerance, search window and metric for target matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSpec {
    /// Meters.
    pub delta: f64,
    /// Seconds, applied on both sides of the instance time.
    pub window: f64,
    #[serde(default)]
    pub distance: PoseDistanceSpec,
}

impl MatchSpec {
    pub fn thymio_line() -> Self {
        Self {
            delta: 0.02,
            window: 30.0,
            distance: PoseDistanceSpec::default(),
        }
    }

    pub fn grid17() -> Self {
        Self {
            delta: 0.25,
            window: 30.0,
            distance: PoseDistanceSpec::position_only(),
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(DatasetError::InvalidSpec(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.window > 0.0) {
            return Err(DatasetError::InvalidSpec(format!("window must be positive, got {}", self.window)));
        }
        if !self.distance.is_valid() {
            return Err(DatasetError::InvalidSpec("angular weight must be non-negative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sets() {
        let line = TargetPoseSet::thymio_line();
        assert_eq!(line.len(), 31);
        assert_eq!(line.poses[0], Pose2::IDENTITY);
        assert!((line.poses[30].x - 0.30).abs() < 1e-15);
        line.validate().unwrap();

        let grid = TargetPoseSet::grid17();
        assert_eq!(grid.len(), 289);
        assert_eq!(grid.poses[0], Pose2::new(5.0, 4.0, 0.0));
        assert_eq!(grid.poses[288], Pose2::new(-3.0, -4.0, 0.0));
        // robot origin at row 10, column 8
        assert_eq!(grid.poses[10 * 17 + 8], Pose2::IDENTITY);
        grid.validate().unwrap();
    }

    #[test]
    fn invalid_sets() {
        assert!(TargetPoseSet::column(vec![]).is_err());
        assert!(TargetPoseSet::new(vec![Pose2::IDENTITY; 3], (2, 2)).is_err());
        let bad = MatchSpec {
            delta: 0.0,
            ..MatchSpec::thymio_line()
        };
        assert!(bad.validate().is_err());
        let bad = MatchSpec {
            window: -1.0,
            ..MatchSpec::thymio_line()
        };
        assert!(bad.validate().is_err());
    }
}
