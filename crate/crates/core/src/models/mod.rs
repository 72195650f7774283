//! Reference models: what-where autoencoders (square encoder with a square
//! or hexagonal decoder) and auxiliary-classifier GANs (fully square or
//! fully hexagonal).

mod acgan;
mod levels;
mod swwae;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use acgan::{Acgan, Discriminator, DiscriminatorOutput, Generator};
pub use levels::{hex_levels, square_levels, HexLevel, SquareLevel};
pub use swwae::Swwae;

use crate::hexgrid::HexGeometry;
use crate::metrics::MetricReport;
use crate::resample::{HexImage, SquareImage};
use crate::tensor::AdamConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Swwae,
    Acgan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    Square,
    Hex,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swwae" => Ok(Family::Swwae),
            "acgan" => Ok(Family::Acgan),
            _ => Err(Error::Config(format!("unknown model family '{s}'"))),
        }
    }
}

impl FromStr for Lattice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Lattice::Square),
            "hex" => Ok(Lattice::Hex),
            _ => Err(Error::Config(format!("unknown lattice '{s}'"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Swwae => "swwae",
            Family::Acgan => "acgan",
        })
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lattice::Square => "square",
            Lattice::Hex => "hex",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub family: Family,
    pub lattice: Lattice,
    /// `[height, width, channels]` of the square input images.
    pub input_shape: [usize; 3],
    /// Autoencoder core channels, or generator noise length.
    pub latent_dim: usize,
    pub class_count: usize,
    /// Encoder widths (autoencoder) or discriminator widths (GAN).
    pub channel_schedule: Vec<usize>,
    /// Width of the generator seed grid; halved by every upsampling stage.
    pub generator_width: usize,
    pub generator_stages: usize,
    pub embedding_dim: usize,
    /// Identity skip around decoder stages whose input and output widths
    /// agree.
    pub residual: bool,
    pub seed: u64,
}

impl ModelConfig {
    pub fn swwae(lattice: Lattice) -> Self {
        ModelConfig {
            family: Family::Swwae,
            lattice,
            input_shape: [32, 32, 3],
            latent_dim: 128,
            class_count: 10,
            channel_schedule: vec![16, 32, 64, 96, 128],
            generator_width: 512,
            generator_stages: 3,
            embedding_dim: 10,
            residual: false,
            seed: 0,
        }
    }

    pub fn acgan(lattice: Lattice) -> Self {
        ModelConfig {
            family: Family::Acgan,
            latent_dim: 100,
            channel_schedule: vec![16, 32, 64, 128],
            ..ModelConfig::swwae(lattice)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [h, w, c] = self.input_shape;
        if h < 2 || w < 2 || c == 0 {
            return Err(Error::Config(format!("input shape {:?}", self.input_shape)));
        }
        if self.channel_schedule.is_empty() || self.channel_schedule.contains(&0) {
            return Err(Error::Config(format!("channel schedule {:?}", self.channel_schedule)));
        }
        if self.class_count == 0 {
            return Err(Error::Config("class count must be positive".into()));
        }
        match self.family {
            Family::Swwae => {
                if self.channel_schedule.last() != Some(&self.latent_dim) {
                    return Err(Error::Config(format!(
                        "schedule {:?} must end at the core width {}",
                        self.channel_schedule, self.latent_dim
                    )));
                }
            }
            Family::Acgan => {
                let div = 1usize << self.generator_stages;
                if self.generator_stages == 0 || self.generator_width % div != 0 || self.latent_dim == 0 {
                    return Err(Error::Config(format!(
                        "generator width {} not divisible over {} stages",
                        self.generator_width, self.generator_stages
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 100,
            batch_size: 100,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

/// One line of the epoch log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub steps: usize,
    /// Mean training loss (autoencoder) or generator loss (GAN).
    pub loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub discriminator_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub family: Family,
    pub lattice: Lattice,
    pub epochs: Vec<EpochLog>,
    pub final_report: Option<MetricReport>,
    pub trainable_params: usize,
    pub wall_clock_secs: f64,
}

/// A model output on either lattice, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeImage {
    Square(SquareImage),
    Hex(HexImage),
}

impl LatticeImage {
    pub fn data(&self) -> &[f32] {
        match self {
            LatticeImage::Square(s) => &s.data,
            LatticeImage::Hex(h) => &h.data,
        }
    }
}

/// Stack images into `[n, cells, channels]` values.
pub(crate) fn stack<'a>(images: impl IntoIterator<Item = &'a [f32]>, map: impl Fn(f32) -> f64) -> Vec<f64> {
    images.into_iter().flat_map(|d| d.iter().map(|&v| map(v))).collect()
}

/// Clamp-and-cast one sample's activations into an image.
pub(crate) fn to_image(values: &[f64], shape: OutputShape) -> Result<LatticeImage> {
    let data: Vec<f32> = values.iter().map(|&v| v.clamp(0.0, 1.0) as f32).collect();
    match shape {
        OutputShape::Square { height, width, channels } => {
            Ok(LatticeImage::Square(SquareImage::new(height, width, channels, data)?))
        }
        OutputShape::Hex { geometry, channels } => Ok(LatticeImage::Hex(HexImage::new(geometry, channels, data)?)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputShape {
    Square { height: usize, width: usize, channels: usize },
    Hex { geometry: HexGeometry, channels: usize },
}

impl OutputShape {
    pub fn cells(&self) -> usize {
        match self {
            OutputShape::Square { height, width, .. } => height * width,
            OutputShape::Hex { geometry, .. } => geometry.len(),
        }
    }

    pub fn channels(&self) -> usize {
        match *self {
            OutputShape::Square { channels, .. } | OutputShape::Hex { channels, .. } => channels,
        }
    }

    /// `(rows, cols, channels)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        match *self {
            OutputShape::Square { height, width, channels } => (height, width, channels),
            OutputShape::Hex { geometry, channels } => (geometry.rows, geometry.cols, channels),
        }
    }
}

/// Deterministic epoch order.
pub(crate) fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut crate::tensor::seeded_rng(seed, &format!("shuffle/{epoch}")));
    order
}
