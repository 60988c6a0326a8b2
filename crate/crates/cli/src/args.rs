use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use somqe::{InitMode, Placement, SynthMode, TrainConfig};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "somqe",
    version,
    about = "Order image series by self-organizing map quantization error"
)]
pub struct Cli {
    /// Worker threads for loading, preprocessing and scoring ("auto" or a positive integer).
    #[arg(long, global = true, env = "SOMQE_THREADS", default_value = "auto")]
    pub threads: Threads,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic series with known altered fractions plus manifest.json.
    Synth(SynthArgs),
    /// Train a lattice on one image and write lattice.json.
    Train(TrainArgs),
    /// Train on a reference image and rank every image of a directory by QE.
    Classify(ClassifyArgs),
    /// Time training and scoring against the reference budgets.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Fixed(n)),
            _ => Err(format!(
                "expected \"auto\" or a positive integer, got {s:?}"
            )),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub rows: u32,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub cols: u32,
    /// Constant neighbourhood radius in grid steps (Chebyshev distance).
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainingArgs {
    /// Single-pixel update steps.
    #[arg(long, default_value_t = 10_000)]
    pub iterations: u64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha_start: f64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha_end: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::UniformRandom)]
    pub init_mode: InitArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    SamplePixels,
    UniformRandom,
}

impl TrainingArgs {
    pub fn train_config(&self, radius: usize) -> Result<TrainConfig, CliError> {
        let config = TrainConfig {
            iterations: self.iterations,
            alpha_start: self.alpha_start,
            alpha_end: self.alpha_end,
            radius,
            seed: self.seed,
            init_mode: match self.init_mode {
                InitArg::SamplePixels => InitMode::SamplePixels,
                InitArg::UniformRandom => InitMode::UniformRandom,
            },
        };
        config
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ColorMode {
    #[default]
    AsIs,
    ForceGray,
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    /// Resize every image to this width (default: the reference image's width).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub width: Option<u32>,
    /// Resize every image to this height (default: the reference image's height).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub height: Option<u32>,
    #[arg(long, value_enum, default_value_t = ColorMode::AsIs)]
    pub color: ColorMode,
    /// Match each image's per-channel mean and standard deviation to the reference.
    #[arg(long)]
    pub match_contrast: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Gray)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub width: u32,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub height: u32,
    /// Comma-separated, strictly increasing altered fractions (default: 0 to 0.4 in 17 steps).
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// Uniform per-component jitter amplitude.
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    #[arg(long, value_enum, default_value_t = PlacementArg::Scattered)]
    pub placement: PlacementArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Gray,
    BlueYellow,
}

impl From<ModeArg> for SynthMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Gray => SynthMode::Grayscale,
            ModeArg::BlueYellow => SynthMode::BlueYellow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementArg {
    Scattered,
    Blobs,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Scattered => Placement::Scattered,
            PlacementArg::Blobs => Placement::Blobs,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Training image (PNG, PGM or PPM).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub width: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub height: Option<u32>,
    #[arg(long, value_enum, default_value_t = ColorMode::AsIs)]
    pub color: ColorMode,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    /// Directory holding the series (*.png, *.pgm, *.ppm).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    /// Image id (file stem) to train on, or "first" for the lexicographically first id.
    #[arg(long, default_value = "first")]
    pub reference: String,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    /// List report.csv rows from highest to lowest QE.
    #[arg(long)]
    pub descending: bool,
    /// Also write the preprocessed images to <out>/preprocessed/ as 8-bit PGM/PPM.
    #[arg(long)]
    pub dump_preprocessed: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Gray)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub width: u32,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub height: u32,
    /// Images in the scoring corpus.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub images: u32,
    /// Images in the end-to-end train+classify run.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u32).range(1..))]
    pub series: u32,
    /// Repetitions; the median is reported.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
}
