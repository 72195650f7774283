//! MNIST IDX files, raw or gzip-compressed.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use super::{normalize, Dataset, Split, INPUT_SIZE};
use crate::resample::SquareImage;
use crate::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 2051;
pub const IDX_LABELS_MAGIC: u32 = 2049;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    pub dims: Vec<usize>,
}

impl IdxHeader {
    pub fn len(&self) -> usize {
        self.dims.first().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn header_bytes(&self) -> usize {
        4 + 4 * self.dims.len()
    }

    pub fn payload_bytes(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Big-endian magic (unsigned byte data, rank in the low byte) and dims.
pub fn parse_idx_header(bytes: &[u8]) -> Result<IdxHeader> {
    let word = |i: usize| -> Result<u32> {
        bytes
            .get(4 * i..4 * i + 4)
            .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| Error::Format("truncated IDX header".into()))
    };
    let magic = word(0)?;
    if magic >> 8 != 0x08 || !(1..=3).contains(&(magic & 0xff)) {
        return Err(Error::Format(format!("bad IDX magic {magic:#010x}")));
    }
    let rank = (magic & 0xff) as usize;
    let dims = (1..=rank).map(|i| word(i).map(|d| d as usize)).collect::<Result<_>>()?;
    Ok(IdxHeader { magic, dims })
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Header and payload of an IDX file with the expected magic.
pub fn read_idx(path: &Path, magic: u32) -> Result<(IdxHeader, Vec<u8>)> {
    let bytes = read_maybe_gz(path)?;
    let header = parse_idx_header(&bytes)?;
    if header.magic != magic {
        return Err(Error::Format(format!(
            "{}: magic {} where {magic} was expected",
            path.display(),
            header.magic
        )));
    }
    let start = header.header_bytes();
    let end = start + header.payload_bytes();
    if bytes.len() < end {
        return Err(Error::Format(format!(
            "{}: truncated, {} of {} payload bytes",
            path.display(),
            bytes.len().saturating_sub(start),
            header.payload_bytes()
        )));
    }
    Ok((header, bytes[start..end].to_vec()))
}

fn locate(dir: &Path, stem: &str) -> Result<PathBuf> {
    [format!("{stem}.gz"), stem.to_string()]
        .iter()
        .map(|n| dir.join(n))
        .find(|p| p.exists())
        .ok_or_else(|| {
            Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} not found in {}", stem, dir.display()),
            ))
        })
}

/// MNIST from `dir`: 28x28 digits zero-padded to 32x32, replicated to
/// three channels and scaled to `[0, 1]`.
pub fn load_mnist(dir: &Path, split: Split) -> Result<Dataset> {
    let prefix = match split {
        Split::Train => "train",
        Split::Test => "t10k",
    };
    let (ih, pixels) = read_idx(&locate(dir, &format!("{prefix}-images-idx3-ubyte"))?, IDX_IMAGES_MAGIC)?;
    let (lh, labels) = read_idx(&locate(dir, &format!("{prefix}-labels-idx1-ubyte"))?, IDX_LABELS_MAGIC)?;
    if ih.len() != lh.len() {
        return Err(Error::Format(format!("{} images but {} labels", ih.len(), lh.len())));
    }
    let (rows, cols) = (ih.dims[1], ih.dims[2]);
    if rows > INPUT_SIZE || cols > INPUT_SIZE {
        return Err(Error::Format(format!("{rows}x{cols} digits exceed {INPUT_SIZE}x{INPUT_SIZE}")));
    }
    let (top, left) = ((INPUT_SIZE - rows) / 2, (INPUT_SIZE - cols) / 2);
    let images = pixels
        .chunks_exact(rows * cols)
        .map(|digit| {
            let mut data = vec![0.0f32; INPUT_SIZE * INPUT_SIZE * 3];
            for r in 0..rows {
                for c in 0..cols {
                    let v = normalize(digit[r * cols + c]);
                    let o = ((r + top) * INPUT_SIZE + c + left) * 3;
                    data[o..o + 3].fill(v);
                }
            }
            SquareImage::new(INPUT_SIZE, INPUT_SIZE, 3, data)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(images, labels.iter().map(|&l| l as usize).collect(), split, 10)
}
