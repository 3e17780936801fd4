//! `pvclass`: calibration, classification, evaluation, the verification
//! suite and the normality demo.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pvclass::{Class, EstimatorMode};

#[derive(Parser, Debug)]
#[command(name = "pvclass", version, about = "Classification p-values with error-rate control")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a labeled score CSV and write a canonical calibration file.
    Calibrate(CalibrateArgs),
    /// Score samples and decide each one with the derived test.
    Classify(ClassifyArgs),
    /// Run the estimator verification suite.
    Simulate(SimulateArgs),
    /// Generate data, train, calibrate and evaluate the normality tests.
    DemoNormality(DemoArgs),
    /// Sweep α for a derived test on labeled samples.
    Evaluate(EvaluateArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every random choice the command makes.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_level)]
    pub alpha: f64,
    /// 1 controls the false negative rate, 0 the false positive rate.
    #[arg(long = "target-class", default_value = "1")]
    pub target_class: Class,
    /// full, subsample or bootstrap.
    #[arg(long, default_value = "full")]
    pub mode: EstimatorMode,
    #[arg(long = "bootstrap-reps", default_value_t = 200)]
    pub bootstrap_reps: usize,
    #[arg(long = "out-dir", default_value = "pvclass-out")]
    pub out_dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// key=value file supplying any flag; command-line flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with `score,label` columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to <out-dir>/calibration.csv.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub provenance: Option<String>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub calibration: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Sample CSV (`split,group,label,n,v1..v100`); labels are ignored.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to <out-dir>/decisions.csv.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub calibration: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled sample CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "alpha-grid", value_delimiter = ',', default_value = "0.01,0.05,0.1")]
    pub alpha_grid: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1000)]
    pub redraws: usize,
    #[arg(long, default_value_t = 10_000)]
    pub queries: usize,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "train-per-class", default_value_t = 20_000)]
    pub train_per_class: usize,
    #[arg(long = "calib-per-class", default_value_t = 10_000)]
    pub calib_per_class: usize,
    #[arg(long = "eval-per-class", default_value_t = 10_000)]
    pub eval_per_class: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80,90,100")]
    pub sizes: Vec<usize>,
    #[arg(long = "alpha-grid", value_delimiter = ',', default_value = "0.01,0.05,0.1")]
    pub alpha_grid: Vec<f64>,
    #[arg(long = "power-alpha", default_value_t = 0.1, value_parser = parse_level)]
    pub power_alpha: f64,
    #[arg(long = "palette-per-distribution", default_value_t = 250)]
    pub palette_per_distribution: usize,
    #[arg(long = "null-reps", default_value_t = 20_000)]
    pub null_reps: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long = "learning-rate", default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long = "batch-size", default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,
    /// Also write the generated samples (large).
    #[arg(long = "save-data")]
    pub save_data: bool,
}

fn parse_level(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Calibrate(a) => &a.common,
            Command::Classify(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::DemoNormality(a) => &a.common,
            Command::Evaluate(a) => &a.common,
        }
    }
}

/// Outcome of a command that ran to completion.
pub enum Verdict {
    Ok,
    ChecksFailed,
}

fn main() -> ExitCode {
    let argv = match config::expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.command.common().threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.command) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
