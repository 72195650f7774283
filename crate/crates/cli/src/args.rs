use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hexnet::models::{Family, Lattice};
use hexnet::resample::Interpolation;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "hexnet", version, about = "Hexagonal image sampling and hexagonal generative models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Resample a PNG onto its fitted hexagonal grid (HEXI output)
    Transform(TransformArgs),
    /// Area-weighted MSE, PSNR and MAE between a PNG and a HEXI file
    Metrics(MetricsArgs),
    /// Train an autoencoder or GAN
    Train(TrainArgs),
    /// Sample a trained GAN, one rendered PNG per class and sample
    Generate(GenerateArgs),
    /// Rasterize a HEXI file as hexagons
    Render(RenderArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nearest,
    Bilinear,
    Bicubic,
    Area,
}

impl From<Method> for Interpolation {
    fn from(m: Method) -> Self {
        match m {
            Method::Nearest => Interpolation::Nearest,
            Method::Bilinear => Interpolation::Bilinear,
            Method::Bicubic => Interpolation::Bicubic,
            Method::Area => Interpolation::Area,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Swwae,
    Acgan,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Swwae => Family::Swwae,
            FamilyArg::Acgan => Family::Acgan,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeArg {
    Square,
    Hex,
}

impl From<LatticeArg> for Lattice {
    fn from(l: LatticeArg) -> Self {
        match l {
            LatticeArg::Square => Lattice::Square,
            LatticeArg::Hex => Lattice::Hex,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetArg {
    Mnist,
    Cifar10,
    /// One subdirectory of images per class
    Folder,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    Train,
    Test,
}

#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    /// Input PNG
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output HEXI file
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Area)]
    pub method: Method,
}

#[derive(Args, Debug, Serialize)]
pub struct MetricsArgs {
    /// Square reference PNG
    #[arg(long)]
    pub square: PathBuf,
    /// Hexagonal HEXI file on the reference's fitted grid
    #[arg(long)]
    pub hex: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Swwae)]
    pub family: FamilyArg,
    #[arg(long, value_enum, default_value_t = LatticeArg::Hex)]
    pub lattice: LatticeArg,
    #[arg(long, value_enum, default_value_t = DatasetArg::Mnist)]
    pub dataset: DatasetArg,
    /// Dataset directory [default: data/<dataset>]
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 100)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 2e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use only the first N training items
    #[arg(long)]
    pub limit: Option<usize>,
    /// Split scored in report.csv
    #[arg(long, value_enum, default_value_t = SplitArg::Train)]
    pub eval_split: SplitArg,
    /// Cap on evaluation items [default: same as --limit]
    #[arg(long)]
    pub eval_limit: Option<usize>,
    /// Generator seed width (GAN only)
    #[arg(long, default_value_t = 512)]
    pub generator_width: usize,
    /// Identity skip around decoder stages of equal width (autoencoder only)
    #[arg(long)]
    pub residual: bool,
    /// Output directory
    #[arg(long, default_value = "runs/latest")]
    pub out: PathBuf,
    /// Continue from <out>/checkpoint.hxck when present
    #[arg(long)]
    pub resume: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    /// GAN checkpoint written by `train`
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Model config [default: config.json beside the checkpoint]
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Classes to sample [default: all]
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output pixels per input pixel
    #[arg(long, default_value_t = 8.0)]
    pub scale: f64,
    #[arg(long, short, default_value = "samples")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct RenderArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Output pixels per input pixel (at least 4)
    #[arg(long, default_value_t = 8.0)]
    pub scale: f64,
}
