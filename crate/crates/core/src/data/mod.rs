//! Dataset loaders, PNG interchange, the `HEXI` hexagonal image file and
//! hexagon rasterization.

mod cifar;
mod folder;
mod hexfile;
mod idx;
mod png;
mod render;

use std::fmt;
use std::str::FromStr;

pub use cifar::{load_cifar10, CIFAR_RECORD_LEN};
pub use folder::load_image_folder;
pub use hexfile::{read_hex_image, write_hex_image, load_hex_image, save_hex_image, HEXI_MAGIC, HEXI_VERSION};
pub use idx::{load_mnist, parse_idx_header, read_idx, IdxHeader, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use png::{read_png, write_png};
pub use render::{render_hex, render_hex_mask};

use crate::resample::SquareImage;
use crate::{Error, Result};

/// Side of the square model input.
pub const INPUT_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::Config(format!("unknown split '{s}'"))),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Labeled images, normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Vec<SquareImage>,
    pub labels: Vec<usize>,
    pub split: Split,
    pub class_count: usize,
}

impl Dataset {
    pub fn new(images: Vec<SquareImage>, labels: Vec<usize>, split: Split, class_count: usize) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::dim(format!("{} images, {} labels", images.len(), labels.len())));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::Label { label, class_count });
        }
        Ok(Dataset {
            images,
            labels,
            split,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// First `n` items (all when `n` is `None`).
    pub fn limited(mut self, n: Option<usize>) -> Self {
        if let Some(n) = n {
            self.images.truncate(n);
            self.labels.truncate(n);
        }
        self
    }

    /// Items per class.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.class_count];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }
}

pub fn normalize(v: u8) -> f32 {
    v as f32 / 255.0
}

pub fn denormalize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}
