use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use longrange::pipeline::{
    cmd_collect, cmd_eval, cmd_label, cmd_pipeline, cmd_stats, cmd_train, ExperimentConfig, PipelineError,
};

#[derive(Parser)]
#[command(version, about = "Collect, label, train and evaluate long-range perception experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration (defaults to the floor-grid preset).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// No progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every scenario and write trajectory logs.
    Collect,
    /// Turn logs into labeled datasets and label statistics.
    Label,
    /// Recount label statistics from the datasets.
    Stats,
    /// Train on the train scenarios.
    Train,
    /// Evaluate the checkpoint on the test scenarios.
    Eval,
    /// Collect, label, train and eval in sequence.
    Pipeline {
        /// Validate the configuration and stop.
        #[arg(long)]
        dry_run: bool,
    },
}

fn load(cli: &Cli) -> Result<ExperimentConfig, PipelineError> {
    let mut config = match &cli.config {
        Some(p) => ExperimentConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::floor_grid(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.output_dir = cli.out.clone();
    config.quiet = cli.quiet;
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let config = load(cli)?;
    match cli.command {
        Command::Collect => cmd_collect(&config).map(drop),
        Command::Label => cmd_label(&config).map(drop),
        Command::Stats => cmd_stats(&config).map(drop),
        Command::Train => cmd_train(&config).map(drop),
        Command::Eval => cmd_eval(&config).map(drop),
        Command::Pipeline { dry_run } => cmd_pipeline(&config, dry_run).map(drop),
    }
}

/// Error class name and exit code.
fn classify(e: &PipelineError) -> (&'static str, u8) {
    match e {
        PipelineError::Config(_) | PipelineError::Json(_) => ("config", 2),
        PipelineError::MissingArtifact(_) => ("missing artifact", 3),
        PipelineError::ScenarioOverlap(_) | PipelineError::EmptySplit(_) => ("split", 4),
        PipelineError::Io(_) => ("io", 5),
        PipelineError::MalformedLog { .. } | PipelineError::Dataset(_) => ("data", 6),
        PipelineError::Sim(_) | PipelineError::Nn(_) | PipelineError::Eval(_) => ("run", 1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (class, code) = classify(&e);
            eprintln!("error: {class}: {e}");
            ExitCode::from(code)
        }
    }
}
