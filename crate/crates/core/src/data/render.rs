//! Rasterize hexagonal images as filled hexagons on a black background.

use crate::hexgrid::{HexGeometry, SQRT_3};
use crate::resample::{HexImage, SquareImage};
use crate::{Error, Result};

pub const MIN_RENDER_SCALE: f64 = 4.0;

/// Inside the pointy-top hexagon of circumradius `r` centered at origin.
fn in_hexagon(dx: f64, dy: f64, r: f64) -> bool {
    let (ax, ay) = (dx.abs(), dy.abs());
    ax <= 0.5 * SQRT_3 * r && ay <= r - ax / SQRT_3
}

/// Cell covering each output pixel center, `None` for background.
/// `scale` is output pixels per lattice unit.
pub fn render_hex_mask(g: &HexGeometry, scale: f64) -> Result<(usize, usize, Vec<Option<usize>>)> {
    if !(scale >= MIN_RENDER_SCALE) {
        return Err(Error::Domain(format!("render scale {scale} below {MIN_RENDER_SCALE}")));
    }
    let (x0, y0, x1, y1) = g.bounding_box();
    let width = ((x1 - x0) * scale).ceil() as usize;
    let height = ((y1 - y0) * scale).ceil() as usize;
    let mut mask = Vec::with_capacity(width * height);
    for py in 0..height {
        for px in 0..width {
            let x = x0 + (px as f64 + 0.5) / scale;
            let y = y0 + (py as f64 + 0.5) / scale;
            let c = g.nearest_cell(x, y);
            let (cx, cy) = g.center_of(c.row as i64, c.col as i64);
            mask.push(in_hexagon(x - cx, y - cy, g.circumradius).then(|| g.index(c)));
        }
    }
    Ok((height, width, mask))
}

pub fn render_hex(img: &HexImage, scale: f64) -> Result<SquareImage> {
    let (height, width, mask) = render_hex_mask(&img.geometry, scale)?;
    let ch = img.channels;
    let mut data = vec![0.0f32; height * width * ch];
    for (p, cell) in mask.iter().enumerate() {
        if let Some(c) = cell {
            data[p * ch..(p + 1) * ch].copy_from_slice(img.cell(*c));
        }
    }
    SquareImage::new(height, width, ch, data)
}
