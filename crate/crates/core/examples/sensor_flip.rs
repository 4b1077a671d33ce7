// Mirror augmentation: flipping the line camera image also swaps the
// readings of mirrored proximity sensors.
//
// ```bash
// cargo run --example sensor_flip
// ```

use longrange::dataset::{augment, flip_horizontal, AugmentConfig, AugmentLayout, InstanceSource, LabeledInstance};
use longrange::sim::SensorRig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rig = SensorRig::obstacle_linescan(5);
    let layout = AugmentLayout::five_sensors(rig.layout());
    // two targets x five sensors; only the rightmost sensor sees something
    let inst = LabeledInstance {
        input: vec![0.9, 0.5, 0.7, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        labels: vec![1, 0, 0, 0, 0, 1, 0, 0, 0, 0],
        mask: vec![1, 1, 1, 1, 1, 1, 1, 1, 0, 0],
        source: InstanceSource { scenario: 1, t: 0.0 },
    };
    let flipped = flip_horizontal(&inst, &layout)?;
    println!("input  {:?}\n    -> {:?}", inst.input, flipped.input);
    println!("labels {:?}\n    -> {:?}", inst.labels, flipped.labels);
    println!("mask   {:?}\n    -> {:?}", inst.mask, flipped.mask);

    let noisy = augment(&inst, &layout, &AugmentConfig::default(), 17)?;
    println!("random augmentation: {:?}", noisy.input);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
