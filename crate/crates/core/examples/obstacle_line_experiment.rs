// Obstacle prediction up to 30 cm ahead from a line camera, labeled by
// five proximity sensors. Prints the AUC of every sensor against distance.
//
// Pass `--full` for the complete preset (10 arenas x 10 minutes).
//
// ```bash
// cargo run --release --example obstacle_line_experiment -- --full
// ```

use longrange::pipeline::{cmd_pipeline, cmd_stats, ExperimentConfig};

fn run(full: bool, out: &std::path::Path) -> Result<(), Box<dyn std::error::Error>> {
    let mut config = if full {
        ExperimentConfig::obstacle_line()
    } else {
        ExperimentConfig::from_json(
            r#"{
                "task": "obstacle-line",
                "scenarios": 4,
                "duration": 180.0,
                "test_scenarios": [4],
                "train": {"epochs": 2, "steps_per_epoch": 100},
                "bootstrap_rounds": 20
            }"#,
        )?
    };
    config.output_dir = out.to_path_buf();
    config.quiet = !full;
    let report = cmd_pipeline(&config, false)?.expect("not a dry run");
    let stats = cmd_stats(&config)?;

    println!("dist  known   AUC per sensor (right to left)");
    for cm in 0..=30 {
        let aucs: Vec<String> = (0..5)
            .map(|s| match report.label(cm, s).mean() {
                Some(a) => format!("{a:.2}"),
                None => "  - ".to_string(),
            })
            .collect();
        println!("{cm:2} cm {:7}  {}", stats.per_target(cm).known(), aucs.join("  "));
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    run(false, dir.path())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    if std::env::args().any(|a| a == "--full") {
        run(true, std::path::Path::new("out/obstacle-line"))
    } else {
        run_example()
    }
}
