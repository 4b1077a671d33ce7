// Composing, inverting and comparing planar poses.
//
// ```bash
// cargo run --example pose_algebra
// ```

use std::f64::consts::FRAC_PI_2;

use longrange::geom::{pose_distance, Pose2, PoseDistanceSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let robot = Pose2::new(2.0, 1.0, FRAC_PI_2);
    let ahead = Pose2::new(0.3, 0.0, 0.0);

    // a target pose 30 cm in front of the robot, in world coordinates
    let target = robot.compose(&ahead);
    println!("robot  {robot:?}");
    println!("target {target:?}");

    // and back into the robot frame
    let rel = robot.relative(&target);
    println!("relative {rel:?}");
    assert!((rel.x - 0.3).abs() < 1e-12 && rel.y.abs() < 1e-12);

    let round_trip = robot.compose(&robot.inverse());
    println!("p * p^-1 = {round_trip:?}");

    let later = Pose2::new(2.05, 1.32, FRAC_PI_2 + 0.2);
    let full = pose_distance(&target, &later, &PoseDistanceSpec::default());
    let position = pose_distance(&target, &later, &PoseDistanceSpec::position_only());
    println!("distance to a later pose: {full:.4} (position only {position:.4})");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
