mod commands;
mod manifest;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Radar-based eating and drinking gesture detection toolkit.
#[derive(Parser, Debug)]
#[command(name = "eatradar", version)]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set epochs=5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for data-parallel kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a scripted meal session.
    Simulate(SimulateArgs),
    /// Raw cube to cropped range-Doppler cube (and optionally a Doppler-time map).
    Process(ProcessArgs),
    /// Write a meal-level cross-validation plan.
    Folds(FoldsArgs),
    /// Train the network on one fold.
    Train(TrainArgs),
    /// Frame-wise predictions for one meal.
    Predict(PredictArgs),
    /// Score predictions against annotations.
    Evaluate(EvaluateArgs),
    /// Write an RD frame or a Doppler-time map as PGM or CSV.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, default_value = "default")]
    pub profile: String,
    #[arg(long = "duration-s", default_value_t = 120.0)]
    pub duration_s: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
    /// File stem for the outputs.
    #[arg(long, default_value = "meal")]
    pub name: String,
    /// Write the processed RD cube instead of the raw cube.
    #[arg(long)]
    pub rd: bool,
}

#[derive(Args, Debug)]
pub struct ProcessArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dt: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FoldsArgs {
    /// Comma-separated meal ids.
    #[arg(long, value_delimiter = ',', required_unless_present = "data_dir")]
    pub meals: Vec<String>,
    /// Take meal ids from the `*.annotations.csv` files in this directory.
    #[arg(long = "data-dir")]
    pub data_dir: Option<PathBuf>,
    #[arg(long = "n-folds", default_value_t = 8)]
    pub n_folds: u32,
    #[arg(long = "val-size", default_value_t = 1)]
    pub val_size: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Directory holding `<id>.rd.eatr` and `<id>.annotations.csv` per meal.
    #[arg(long = "data-dir")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub folds: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub fold: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Checkpoint path; the history CSV goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// RD cube of the meal.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Ground-truth annotation CSVs.
    #[arg(long, required = true)]
    pub gt: Vec<PathBuf>,
    /// Prediction CSVs, in the same order as `--gt`.
    #[arg(long, required = true)]
    pub pred: Vec<PathBuf>,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, conflicts_with = "dtmap", required_unless_present = "dtmap")]
    pub frame: Option<usize>,
    #[arg(long)]
    pub dtmap: bool,
    /// Output file; `.csv` selects CSV, anything else PGM.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        std::env::set_var("RAYON_NUM_THREADS", n.to_string());
    }
    let settings = match settings::Settings::load(cli.config.as_deref(), &cli.overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&settings, a),
        Command::Process(a) => commands::process(&settings, a),
        Command::Folds(a) => commands::folds(&settings, a),
        Command::Train(a) => commands::train(&settings, a),
        Command::Predict(a) => commands::predict(&settings, a),
        Command::Evaluate(a) => commands::evaluate(&settings, a),
        Command::Render(a) => commands::render(&settings, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
