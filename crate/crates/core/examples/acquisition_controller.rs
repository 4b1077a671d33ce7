// The approach-and-back-off controller in a random obstacle arena.
//
// ```bash
// cargo run --example acquisition_controller
// ```

use std::collections::BTreeMap;

use longrange::sim::{
    generate_obstacle_world, run_acquisition_traced, AcquisitionConfig, ObstacleWorldSpec, SensorRig,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let world = generate_obstacle_world(3, &ObstacleWorldSpec::default())?;
    let rig = SensorRig::obstacle_linescan(33);
    let (log, phases) = run_acquisition_traced(&world, &rig, &AcquisitionConfig::default(), 120.0, 10.0, 11)?;

    let mut time_in: BTreeMap<String, usize> = BTreeMap::new();
    for p in &phases {
        *time_in.entry(format!("{p:?}")).or_default() += 1;
    }
    println!("{} records over 120 s", log.len());
    for (phase, n) in &time_in {
        println!("  {phase:<8} {:5.1} s", *n as f64 / 10.0);
    }
    let detections = log.iter().filter(|r| r.short_readings.contains(&1)).count();
    println!("records with a proximity detection: {detections}");

    // depth channel of the line camera at the first detection
    if let Some(r) = log.iter().find(|r| r.short_readings.contains(&1)) {
        let depth: Vec<String> = r.long_reading.iter().step_by(2).map(|v| format!("{v:.2}")).collect();
        println!("t = {:.1} s, sensors {:?}, depth {}", r.t, r.short_readings, depth.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
