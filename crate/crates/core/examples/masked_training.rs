// Training with partially known labels. Masked labels carry no gradient,
// so their stored values never matter.
//
// ```bash
// cargo run --example masked_training
// ```

use longrange::dataset::{InstanceSource, LabeledInstance};
use longrange::nn::{predict, read_checkpoint, train, write_checkpoint, Checkpoint, NetworkSpec, Shape, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Label k is "input k exceeds 0.5", known with probability one half.
fn dataset(n: usize, seed: u64) -> Vec<LabeledInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let input: Vec<f32> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let mask: Vec<u8> = (0..4).map(|_| rng.random_bool(0.5) as u8).collect();
            let labels = input.iter().zip(&mask).map(|(&v, &m)| m * (v > 0.5) as u8).collect();
            LabeledInstance {
                input,
                labels,
                mask,
                source: InstanceSource { scenario: 1, t: k as f64 },
            }
        })
        .collect()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = dataset(500, 1);
    let spec = NetworkSpec::mlp(Shape::flat(4), 16, 4)?;
    let mut config = TrainConfig {
        epochs: 4,
        steps_per_epoch: 150,
        batch_size: 32,
        ..TrainConfig::default()
    };
    config.optimizer.learning_rate = 0.01;
    let outcome = train(&data, &spec, &config, None)?;
    for (epoch, loss) in outcome.loss_history.iter().enumerate() {
        println!("epoch {} loss {loss:.4}", epoch + 1);
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("checkpoint.json");
    write_checkpoint(&path, &Checkpoint::new(spec.clone(), config, outcome.params))?;
    let restored = read_checkpoint(&path)?;

    let probe = dataset(4, 2);
    let out = predict(&restored.params, &restored.spec, &probe)?;
    for (inst, pred) in probe.iter().zip(out.chunks(4)) {
        let p: Vec<String> = pred.iter().map(|v| format!("{v:.2}")).collect();
        println!("input {:?} -> {}", inst.input, p.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
