// ROC AUC with a bootstrap interval, and a per-label report written as
// CSV and PGM heatmaps.
//
// ```bash
// cargo run --example auc_bootstrap
// ```

use longrange::dataset::{InstanceSource, LabeledInstance};
use longrange::eval::{auc, bootstrap_auc, report, write_auc_csv, write_auc_heatmap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scores = [0.1, 0.4, 0.35, 0.8];
    let truths = [0, 0, 1, 1];
    println!("AUC of the textbook example: {:?}", auc(&scores, &truths)?);

    // a noisy scorer: positives shifted up by `signal`
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let truths: Vec<u8> = (0..300).map(|_| rng.random_bool(0.4) as u8).collect();
    for signal in [0.0, 0.5, 1.0, 3.0] {
        let scores: Vec<f64> = truths.iter().map(|&t| rng.random::<f64>() + signal * t as f64 * 0.3).collect();
        let ci = bootstrap_auc(&scores, &truths, 200, 1)?;
        println!("signal {signal:.1}: AUC {:.3} [{:.3}, {:.3}]", ci.mean, ci.low, ci.high);
    }

    // a 3 x 2 target grid with one sensor; predictive power fades by row
    let instances: Vec<LabeledInstance> = (0..400)
        .map(|k| {
            let labels: Vec<u8> = (0..6).map(|_| rng.random_bool(0.5) as u8).collect();
            LabeledInstance {
                input: Vec::new(),
                mask: vec![1; 6],
                labels,
                source: InstanceSource { scenario: 1, t: k as f64 },
            }
        })
        .collect();
    let preds: Vec<f64> = instances
        .iter()
        .flat_map(|i| {
            let noise: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            i.labels.iter().enumerate().map(move |(j, &l)| {
                let strength = 1.0 - (j / 2) as f64 / 2.0;
                strength * l as f64 + noise[j]
            })
        })
        .collect::<Vec<_>>();
    let rep = report(&preds, &instances, 6, 1, 100, 9)?;
    for l in &rep.labels {
        println!("target {} -> {:?}", l.target_index, l.mean().map(|m| (m * 1000.0).round() / 1000.0));
    }
    let dir = tempfile::tempdir()?;
    write_auc_csv(&dir.path().join("auc.csv"), &rep)?;
    write_auc_heatmap(&dir.path().join("auc.pgm"), &rep, (3, 2))?;
    print!("{}", std::fs::read_to_string(dir.path().join("auc.csv"))?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
