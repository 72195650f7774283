//! Transformation-efficiency metrics between a square image and its
//! hexagonal counterpart.
//!
//! The area-weighted MSE is
//!
//! ```text
//! MSE = 1/|A| * sum_{a in A} |a| * (S(a) - H(a))^2
//! ```
//!
//! where `a` ranges over the non-empty pixel/hexagon intersections of an
//! [`OverlapMap`], `|a|` is the intersection area and `|A|` is read as the
//! total intersection area `sum |a|` (not the number of intersections), which
//! makes the MSE a weighted mean. With several channels the squared error of
//! each intersection is averaged over channels before weighting.

use crate::resample::{HexImage, OverlapMap, SquareImage};
use crate::{Error, Result};

/// Quality summary. `psnr` is `f64::INFINITY` when `mse == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub psnr: f64,
    pub mae: f64,
    pub total_weight: f64,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "mse,psnr,mae";

    /// `mse,psnr,mae` with `inf` for an infinite PSNR.
    pub fn csv_row(&self) -> String {
        format!("{:.9e},{},{:.9e}", self.mse, format_psnr(self.psnr), self.mae)
    }
}

pub fn format_psnr(psnr: f64) -> String {
    if psnr.is_infinite() {
        "inf".to_string()
    } else {
        format!("{psnr:.6}")
    }
}

/// Fixed-order pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn check_pair(s: &SquareImage, h: &HexImage, map: &OverlapMap) -> Result<()> {
    if s.channels != h.channels {
        return Err(Error::dim(format!(
            "square image has {} channels, hex image {}",
            s.channels, h.channels
        )));
    }
    map.check_against(s.height, s.width, &h.geometry)?;
    if map.total_area <= 0.0 {
        return Err(Error::Domain("overlap map has zero total area".into()));
    }
    Ok(())
}

fn per_entry<F>(s: &SquareImage, h: &HexImage, map: &OverlapMap, f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let ch = s.channels as f64;
    map.entries
        .iter()
        .map(|e| {
            let sp = s.pixel(map.pixel_index(e));
            let hp = h.cell(map.hex_index(e));
            let err: f64 = sp
                .iter()
                .zip(hp)
                .map(|(&a, &b)| f(a as f64 - b as f64))
                .sum();
            e.area * err / ch
        })
        .collect()
}

/// Area-weighted MSE between `s` and `h`.
pub fn transformation_mse(s: &SquareImage, h: &HexImage, map: &OverlapMap) -> Result<f64> {
    check_pair(s, h, map)?;
    Ok(pairwise_sum(&per_entry(s, h, map, |d| d * d)) / map.total_area)
}

/// Area-weighted mean absolute error.
pub fn transformation_mae(s: &SquareImage, h: &HexImage, map: &OverlapMap) -> Result<f64> {
    check_pair(s, h, map)?;
    Ok(pairwise_sum(&per_entry(s, h, map, f64::abs)) / map.total_area)
}

/// Gradient of [`transformation_mse`] with respect to every hex value,
/// laid out like `h.data`:
/// `dMSE/dH(h, c) = 2 / (|A| * C) * sum_{a in h} |a| * (H(h, c) - S(a, c))`.
pub fn transformation_mse_grad(s: &SquareImage, h: &HexImage, map: &OverlapMap) -> Result<Vec<f64>> {
    check_pair(s, h, map)?;
    let ch = s.channels;
    let scale = 2.0 / (map.total_area * ch as f64);
    let mut grad = vec![0.0f64; h.data.len()];
    for e in &map.entries {
        let sp = s.pixel(map.pixel_index(e));
        let hi = map.hex_index(e);
        let hp = h.cell(hi);
        for k in 0..ch {
            grad[hi * ch + k] += scale * e.area * (hp[k] as f64 - sp[k] as f64);
        }
    }
    Ok(grad)
}

/// Peak signal-to-noise ratio in dB; `+inf` when `mse == 0`.
pub fn psnr(mse: f64, max_value: f64) -> Result<f64> {
    if !(mse >= 0.0) {
        return Err(Error::Domain(format!("negative or NaN mse {mse}")));
    }
    if !(max_value > 0.0) {
        return Err(Error::Domain(format!("non-positive peak value {max_value}")));
    }
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (max_value * max_value / mse).log10())
}

/// MSE, PSNR (peak 1.0) and MAE of a square/hex pair.
pub fn transformation_report(s: &SquareImage, h: &HexImage, map: &OverlapMap) -> Result<MetricReport> {
    let mse = transformation_mse(s, h, map)?;
    Ok(MetricReport {
        mse,
        psnr: psnr(mse, 1.0)?,
        mae: transformation_mae(s, h, map)?,
        total_weight: map.total_area,
    })
}

/// Same-lattice report: every pixel is its own unit-area subarea.
pub fn square_report(a: &SquareImage, b: &SquareImage) -> Result<MetricReport> {
    if (a.height, a.width, a.channels) != (b.height, b.width, b.channels) {
        return Err(Error::dim(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.height, a.width, a.channels, b.height, b.width, b.channels
        )));
    }
    let ch = a.channels as f64;
    let per_pixel = |f: fn(f64) -> f64| -> Vec<f64> {
        a.data
            .chunks(a.channels)
            .zip(b.data.chunks(b.channels))
            .map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| f(u as f64 - v as f64)).sum::<f64>() / ch)
            .collect()
    };
    let n = a.pixels() as f64;
    let mse = pairwise_sum(&per_pixel(|d| d * d)) / n;
    Ok(MetricReport {
        mse,
        psnr: psnr(mse, 1.0)?,
        mae: pairwise_sum(&per_pixel(f64::abs)) / n,
        total_weight: n,
    })
}

/// Mean of several reports, weighting each image equally; PSNR is
/// recomputed from the pooled MSE.
pub fn pooled_report(reports: &[MetricReport]) -> Result<MetricReport> {
    if reports.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = reports.len() as f64;
    let mse = pairwise_sum(&reports.iter().map(|r| r.mse).collect::<Vec<_>>()) / n;
    Ok(MetricReport {
        mse,
        psnr: psnr(mse, 1.0)?,
        mae: pairwise_sum(&reports.iter().map(|r| r.mae).collect::<Vec<_>>()) / n,
        total_weight: reports.iter().map(|r| r.total_weight).sum(),
    })
}
