// Floor-color prediction on a 17 x 17 grid of poses around the robot:
// collect, label, train, evaluate, then print the AUC map.
//
// The default is a few-minute desk-scale run; pass `--full` for the
// complete preset (10 worlds x 7 minutes, about two minutes in release).
//
// ```bash
// cargo run --release --example floor_grid_experiment -- --full
// ```

use longrange::pipeline::{cmd_pipeline, ExperimentConfig};

fn run(full: bool, out: &std::path::Path) -> Result<(), Box<dyn std::error::Error>> {
    let mut config = if full {
        ExperimentConfig::floor_grid()
    } else {
        ExperimentConfig::from_json(
            r#"{
                "task": "floor-grid",
                "scenarios": 4,
                "duration": 60.0,
                "test_scenarios": [3, 4],
                "train": {"epochs": 2, "steps_per_epoch": 50},
                "bootstrap_rounds": 20
            }"#,
        )?
    };
    config.output_dir = out.to_path_buf();
    config.quiet = !full;
    let report = cmd_pipeline(&config, false)?.expect("not a dry run");

    println!("camera yaws (deg): {:?}", config.mount_yaws().iter().map(|y| y.to_degrees().round()).collect::<Vec<_>>());
    println!("AUC x 100 per target pose (\".\" below 50 known labels), front row first; robot at row 10, column 8");
    for row in 0..17 {
        let line: Vec<String> = (0..17)
            .map(|col| {
                let label = report.label(row * 17 + col, 0);
                match label.mean() {
                    Some(a) if label.known() >= 50 => format!("{:2.0}", (a * 100.0).min(99.0)),
                    _ => " .".to_string(),
                }
            })
            .collect();
        println!("{}", line.join(" "));
    }
    println!("artifacts in {}", out.display());
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    run(false, dir.path())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    if std::env::args().any(|a| a == "--full") {
        run(true, std::path::Path::new("out/floor-grid"))
    } else {
        run_example()
    }
}
