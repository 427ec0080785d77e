//! `signgan`: the augmentation and classification pipeline as one subcommand
//! per step. Artifacts live under the output root (`--out`, `SIGNGAN_OUT`,
//! `[paths] out` in the config file, then `./signgan-out`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;

use config::PipelineConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "signgan", version, about = "Traffic-sign GAN augmentation pipeline")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output root directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the procedural toy corpus as `<dir>/<class_id>/<n>.png`.
    MakeToy(MakeToyArgs),
    /// Load an image directory and write the stratified train/test split.
    Ingest(IngestArgs),
    /// Build the classically augmented training set.
    Augment(AugmentArgs),
    /// Train (or report on) the per-class GANs.
    GanTrain(GanTrainArgs),
    /// Draw labeled synthetic images from the trained GANs.
    GanSample(GanSampleArgs),
    /// Pretrain the classifier on the real training split.
    ClfTrain(ClfTrainArgs),
    /// Fine-tune a pretrained classifier on an extended training set.
    ClfFinetune(ClfFinetuneArgs),
    /// Score a run on the test split.
    Evaluate(EvaluateArgs),
    /// Compare evaluated runs sharing one test split.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct MakeToyArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory of `<class_id>/` folders holding PPM or PNG files.
    #[arg(long)]
    pub input: PathBuf,
    /// Dataset name under `<out>/data/`.
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub multiplier: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Class policy file overriding the built-in table.
    #[arg(long)]
    pub policy: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GanTrainArgs {
    #[arg(long)]
    pub dataset: String,
    #[arg(long = "input_height", default_value_t = 28)]
    pub input_height: usize,
    #[arg(long = "output_height", default_value_t = 28)]
    pub output_height: usize,
    /// Train; without it, print checkpoint status only.
    #[arg(long)]
    pub train: bool,
    /// Train one class; default is all ten in id order.
    #[arg(long)]
    pub class_id: Option<usize>,
    /// Continue from existing checkpoints.
    #[arg(long)]
    pub resume: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GanSampleArgs {
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a PNG contact sheet (one row per class).
    #[arg(long)]
    pub sheet: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClfTrainArgs {
    #[arg(long)]
    pub dataset: String,
    /// Run name under `<out>/runs/`.
    #[arg(long)]
    pub run: String,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Extension {
    None,
    Synthetic,
    Augmented,
}

#[derive(Debug, Args)]
pub struct ClfFinetuneArgs {
    #[arg(long)]
    pub dataset: String,
    /// Pretrained run to start from.
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub run: String,
    #[arg(long, value_enum)]
    pub extend: Extension,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub run: String,
    /// Row label in reports; defaults to the run name.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<String>,
}

fn run(cli: Cli, args: &[String]) -> Result<(), CliError> {
    let mut cfg = PipelineConfig::resolve(cli.config.as_deref(), cli.out.as_deref())?;
    commands::dispatch(cli.command, &mut cfg, &args[1..])
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("signgan: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
