//! CIFAR-10 binary batches: records of one label byte and 3072 planar
//! R, G, B bytes.

use std::fs;
use std::path::Path;

use super::{normalize, Dataset, Split};
use crate::resample::SquareImage;
use crate::{Error, Result};

pub const CIFAR_RECORD_LEN: usize = 3073;

fn parse_batch(bytes: &[u8], images: &mut Vec<SquareImage>, labels: &mut Vec<usize>) -> Result<()> {
    if bytes.is_empty() || bytes.len() % CIFAR_RECORD_LEN != 0 {
        return Err(Error::Format(format!(
            "{} bytes is not a whole number of {CIFAR_RECORD_LEN}-byte records",
            bytes.len()
        )));
    }
    for rec in bytes.chunks_exact(CIFAR_RECORD_LEN) {
        let mut data = vec![0.0f32; 1024 * 3];
        for p in 0..1024 {
            for c in 0..3 {
                data[p * 3 + c] = normalize(rec[1 + c * 1024 + p]);
            }
        }
        labels.push(rec[0] as usize);
        images.push(SquareImage::new(32, 32, 3, data)?);
    }
    Ok(())
}

/// `data_batch_1..5.bin` (train) or `test_batch.bin` (test) from `dir`.
pub fn load_cifar10(dir: &Path, split: Split) -> Result<Dataset> {
    let files: Vec<String> = match split {
        Split::Train => (1..=5).map(|i| format!("data_batch_{i}.bin")).collect(),
        Split::Test => vec!["test_batch.bin".into()],
    };
    let (mut images, mut labels) = (Vec::new(), Vec::new());
    for f in files {
        let bytes = fs::read(dir.join(&f))?;
        parse_batch(&bytes, &mut images, &mut labels).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{f}: {m}")),
            other => other,
        })?;
    }
    Dataset::new(images, labels, split, 10)
}
