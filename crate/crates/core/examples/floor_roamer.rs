// A roaming robot on a procedurally colored floor, with its downward
// floor probe and three patch cameras.
//
// ```bash
// cargo run --example floor_roamer
// ```

use longrange::sim::{generate_floor_world, read_floor_sensor, run_roamer_controller, SensorRig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let world = generate_floor_world(42, 50.0, 0.15, 0.0)?;
    let rig = SensorRig::floor_patch(vec![-0.8, 0.0, 0.8]);
    let log = run_roamer_controller(&world, &rig, 60.0, 20.0, 7)?;

    let bright = log.iter().filter(|r| r.short_readings[0] == 1).count();
    let last = log.last().expect("60 s of records");
    println!(
        "{} records, robot ended at ({:.2}, {:.2}); floor probe bright {:.0}% of the time",
        log.len(),
        last.pose.x,
        last.pose.y,
        100.0 * bright as f64 / log.len() as f64
    );
    println!("camera reading: {} values per record", last.long_reading.len());
    assert_eq!(read_floor_sensor(&world, &last.pose)?, last.short_readings[0]);

    // coarse ASCII view of the floor around the origin
    for row in 0..12 {
        let y = 6.0 - row as f64;
        let line: String = (0..40)
            .map(|col| {
                let x = -10.0 + 0.5 * col as f64;
                if world.brightness(x, y) == 1 { '#' } else { '.' }
            })
            .collect();
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
