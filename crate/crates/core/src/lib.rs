//! Hexagonal lattice image processing and hexagonal deep learning.
//!
//! The crate is organized bottom-up:
//!
//! - [`hexgrid`]: pointy-top hexagonal lattice geometry, odd-row offset
//!   storage, spiral (septree) addresses and 7-point kernel offsets.
//! - [`resample`]: square/hexagonal resampling and the exact pixel/hexagon
//!   overlap map.
//! - [`metrics`]: area-weighted transformation MSE, its gradient, MAE and PSNR.
//! - [`tensor`]: dense tensors, a tape-based reverse-mode autodiff, Glorot
//!   initialization, Adam and the `HXCK` checkpoint archive.
//! - [`layers`]: hexagonal and square convolution, pooling with an
//!   assignment-solved offset mapping, unpooling, dense and batch norm.
//! - [`models`]: the S/H-SWWAE autoencoders and S/H-ACGAN generators with
//!   their training loops and evaluation.
//! - [`data`]: MNIST / CIFAR-10 / image-folder loaders, the `HEXI` hexagonal
//!   image file and hexagon rasterization.

pub mod data;
pub mod error;
pub mod hexgrid;
pub mod layers;
pub mod metrics;
pub mod models;
pub mod resample;
pub mod tensor;

pub use error::{Error, Result};
