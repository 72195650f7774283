//! Folder-per-class image collections, resized to 32x32.

use std::fs;
use std::path::{Path, PathBuf};

use image::imageops::FilterType;

use super::{normalize, Dataset, Split, INPUT_SIZE};
use crate::resample::SquareImage;
use crate::{Error, Result};

fn sorted_entries(dir: &Path, want_dirs: bool) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() == want_dirs {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Each subdirectory of `dir` (lexicographic order) is one class; its
/// images (lexicographic order) are resized bilinearly to 32x32 RGB.
pub fn load_image_folder(dir: &Path) -> Result<Dataset> {
    let classes = sorted_entries(dir, true)?;
    if classes.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (mut images, mut labels) = (Vec::new(), Vec::new());
    for (label, class_dir) in classes.iter().enumerate() {
        for file in sorted_entries(class_dir, false)? {
            let img = image::open(&file)
                .map_err(|e| Error::Format(format!("{}: {e}", file.display())))?
                .to_rgb8();
            let small = image::imageops::resize(&img, INPUT_SIZE as u32, INPUT_SIZE as u32, FilterType::Triangle);
            let data = small.as_raw().iter().map(|&v| normalize(v)).collect();
            images.push(SquareImage::new(INPUT_SIZE, INPUT_SIZE, 3, data)?);
            labels.push(label);
        }
    }
    if images.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(images, labels, Split::Train, classes.len())
}
