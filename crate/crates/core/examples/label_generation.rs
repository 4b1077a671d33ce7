// Self-supervised labels: match every record of a roaming log against a
// 17 x 17 grid of target poses and count known labels per pose.
//
// ```bash
// cargo run --example label_generation
// ```

use longrange::dataset::{compute_stats, generate_instances, MatchSpec, TargetPoseSet};
use longrange::sim::{generate_floor_world, run_roamer_controller, SensorRig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let world = generate_floor_world(1, 50.0, 0.15, 0.0)?;
    let rig = SensorRig::floor_patch(vec![0.0]);
    let log = run_roamer_controller(&world, &rig, 90.0, 20.0, 2)?;

    let targets = TargetPoseSet::grid17();
    let instances = generate_instances(&log, &targets, &MatchSpec::grid17())?;
    let stats = compute_stats(&instances, targets.len(), 1)?;
    println!("{} records -> {} instances with {} labels each", log.len(), instances.len(), targets.len());

    // fraction of instances with a known label, per target pose
    // (front row at the top, robot at the center of row 10)
    for row in 0..17 {
        let line: String = (0..17)
            .map(|col| {
                let known = stats.per_target(row * 17 + col).known() as f64 / stats.instances as f64;
                match known {
                    k if k > 0.75 => '@',
                    k if k > 0.5 => '#',
                    k if k > 0.25 => '+',
                    k if k > 0.0 => '.',
                    _ => ' ',
                }
            })
            .collect();
        println!("|{line}|");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
