use std::path::Path;

use image::{GrayImage, RgbImage};

use super::{denormalize, normalize};
use crate::resample::SquareImage;
use crate::{Error, Result};

/// Any PNG as 8-bit RGB scaled to `[0, 1]`.
pub fn read_png(path: &Path) -> Result<SquareImage> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = img.dimensions();
    let data = img.as_raw().iter().map(|&v| normalize(v)).collect();
    SquareImage::new(h as usize, w as usize, 3, data)
}

/// One-channel images are written as grayscale, three-channel as RGB.
pub fn write_png(img: &SquareImage, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = img.data.iter().map(|&v| denormalize(v)).collect();
    let (w, h) = (img.width as u32, img.height as u32);
    match img.channels {
        1 => GrayImage::from_raw(w, h, bytes).expect("sized buffer").save(path)?,
        3 => RgbImage::from_raw(w, h, bytes).expect("sized buffer").save(path)?,
        c => return Err(Error::dim(format!("cannot write a {c}-channel PNG"))),
    }
    Ok(())
}
