//! Square <-> hexagonal lattice resampling and the exact overlap map.
//!
//! Square pixel `(row, col)` covers `[col, col + 1] x [row, row + 1]`; its
//! center is at `(col + 0.5, row + 0.5)`. Image data is stored interleaved,
//! row-major: `data[(row * width + col) * channels + channel]`. Hexagonal
//! images use the same layout over the offset grid.

use crate::hexgrid::{HexCoord, HexGeometry, SQRT_3};
use crate::{Error, Result};

/// Overlap areas below this are dropped from the map.
pub const MIN_OVERLAP_AREA: f64 = 1e-12;

fn check_range(data: &[f32]) -> Result<()> {
    match data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(Error::Domain(format!("pixel value {v} outside [0, 1]"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareImage {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl SquareImage {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::dim(format!("empty image {height}x{width}x{channels}")));
        }
        if data.len() != height * width * channels {
            return Err(Error::dim(format!(
                "{} values for a {height}x{width}x{channels} image",
                data.len()
            )));
        }
        check_range(&data)?;
        Ok(SquareImage {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    pub fn pixel(&self, index: usize) -> &[f32] {
        &self.data[index * self.channels..(index + 1) * self.channels]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HexImage {
    pub geometry: HexGeometry,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl HexImage {
    pub fn new(geometry: HexGeometry, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::dim("hex image with zero channels"));
        }
        if data.len() != geometry.len() * channels {
            return Err(Error::dim(format!(
                "{} values for a {}x{}x{channels} hex image",
                data.len(),
                geometry.rows,
                geometry.cols
            )));
        }
        check_range(&data)?;
        Ok(HexImage {
            geometry,
            channels,
            data,
        })
    }

    pub fn filled(geometry: HexGeometry, channels: usize, value: f32) -> Result<Self> {
        Self::new(geometry, channels, vec![value; geometry.len() * channels])
    }

    pub fn get(&self, c: HexCoord, channel: usize) -> f32 {
        self.data[self.geometry.index(c) * self.channels + channel]
    }

    pub fn cell(&self, index: usize) -> &[f32] {
        &self.data[index * self.channels..(index + 1) * self.channels]
    }
}

/// Hexagonal grid for a `height x width` image.
///
/// The circumradius makes one hexagon exactly one square pixel in area,
/// `rows = round(height / (1.5 r))` and `cols = round(width / (sqrt(3) r))`,
/// and the grid is centered over the image. For 32x32 this yields 34x30.
pub fn fit_hex_geometry(height: usize, width: usize) -> Result<HexGeometry> {
    if height < 2 || width < 2 {
        return Err(Error::Domain(format!(
            "image {height}x{width} too small for hexagonal sampling"
        )));
    }
    let r = area_matched_circumradius();
    let rows = ((height as f64 / (1.5 * r)).round() as usize).max(1);
    let cols = ((width as f64 / (SQRT_3 * r)).round() as usize).max(1);
    HexGeometry::centered(rows, cols, r, 0.5 * width as f64, 0.5 * height as f64)
}

/// Circumradius of a regular hexagon of unit area.
pub fn area_matched_circumradius() -> f64 {
    (2.0 / (3.0 * SQRT_3)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapEntry {
    /// Square pixel `(row, col)`.
    pub pixel: (usize, usize),
    pub hex: HexCoord,
    pub area: f64,
}

/// Exact intersections between square pixels and hexagonal cells.
///
/// Entries are ordered by hex cell (row-major), then pixel (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMap {
    pub height: usize,
    pub width: usize,
    pub geometry: HexGeometry,
    pub entries: Vec<OverlapEntry>,
    pub total_area: f64,
}

impl OverlapMap {
    pub fn pixel_index(&self, e: &OverlapEntry) -> usize {
        e.pixel.0 * self.width + e.pixel.1
    }

    pub fn hex_index(&self, e: &OverlapEntry) -> usize {
        self.geometry.index(e.hex)
    }

    /// Sum of entry areas per square pixel.
    pub fn pixel_coverage(&self) -> Vec<f64> {
        let mut cov = vec![0.0; self.height * self.width];
        for e in &self.entries {
            cov[self.pixel_index(e)] += e.area;
        }
        cov
    }

    /// Sum of entry areas per hexagonal cell.
    pub fn hex_coverage(&self) -> Vec<f64> {
        let mut cov = vec![0.0; self.geometry.len()];
        for e in &self.entries {
            cov[self.hex_index(e)] += e.area;
        }
        cov
    }

    pub fn check_against(&self, height: usize, width: usize, geometry: &HexGeometry) -> Result<()> {
        if (self.height, self.width) != (height, width) || self.geometry != *geometry {
            return Err(Error::dim(format!(
                "overlap map for {}x{} / {}x{} hex used with {height}x{width} / {}x{} hex",
                self.height,
                self.width,
                self.geometry.rows,
                self.geometry.cols,
                geometry.rows,
                geometry.cols
            )));
        }
        Ok(())
    }
}

/// Shoelace area of a simple polygon (absolute value).
pub fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let (x0, y0) = poly[i];
            let (x1, y1) = poly[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    0.5 * twice.abs()
}

/// Clip a polygon to one axis-aligned half-plane (`keep_above`: coordinate >= bound).
fn clip_axis(poly: &[(f64, f64)], axis_x: bool, bound: f64, keep_above: bool) -> Vec<(f64, f64)> {
    let coord = |p: &(f64, f64)| if axis_x { p.0 } else { p.1 };
    let inside = |p: &(f64, f64)| {
        if keep_above {
            coord(p) >= bound
        } else {
            coord(p) <= bound
        }
    };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (cin, pin) = (inside(&cur), inside(&prev));
        if cin != pin {
            let t = (bound - coord(&prev)) / (coord(&cur) - coord(&prev));
            let p = (prev.0 + t * (cur.0 - prev.0), prev.1 + t * (cur.1 - prev.1));
            out.push(if axis_x { (bound, p.1) } else { (p.0, bound) });
        }
        if cin {
            out.push(cur);
        }
    }
    out
}

/// Sutherland-Hodgman clip of a convex polygon to `[x0, x1] x [y0, y1]`.
pub fn clip_to_rect(poly: &[(f64, f64)], x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<(f64, f64)> {
    let mut p = clip_axis(poly, true, x0, true);
    p = clip_axis(&p, true, x1, false);
    p = clip_axis(&p, false, y0, true);
    clip_axis(&p, false, y1, false)
}

/// Exact overlap of every hexagon with every unit pixel of a
/// `height x width` image.
pub fn compute_overlap_map(geom: &HexGeometry, height: usize, width: usize) -> OverlapMap {
    let mut entries = Vec::new();
    for index in 0..geom.len() {
        let hex = geom.coord(index);
        let verts = geom.vertices(hex);
        let (min_x, max_x, min_y, max_y) = verts.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        let c0 = min_x.floor().max(0.0) as usize;
        let c1 = (max_x.ceil().min(width as f64).max(0.0)) as usize;
        let r0 = min_y.floor().max(0.0) as usize;
        let r1 = (max_y.ceil().min(height as f64).max(0.0)) as usize;
        for row in r0..r1 {
            for col in c0..c1 {
                let (x, y) = (col as f64, row as f64);
                let clipped = clip_to_rect(&verts, x, y, x + 1.0, y + 1.0);
                let area = polygon_area(&clipped);
                if area >= MIN_OVERLAP_AREA {
                    entries.push(OverlapEntry {
                        pixel: (row, col),
                        hex,
                        area,
                    });
                }
            }
        }
    }
    let total_area = entries.iter().map(|e| e.area).sum();
    OverlapMap {
        height,
        width,
        geometry: *geom,
        entries,
        total_area,
    }
}

/// Hexagonal sampling method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interpolation {
    Nearest,
    Bilinear,
    /// Catmull-Rom (a = -0.5), clamped to [0, 1].
    Bicubic,
    /// Overlap-weighted mean of the covered pixels.
    Area,
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Interpolation::Nearest),
            "bilinear" => Ok(Interpolation::Bilinear),
            "bicubic" => Ok(Interpolation::Bicubic),
            "area" => Ok(Interpolation::Area),
            other => Err(Error::Config(format!("unknown interpolation '{other}'"))),
        }
    }
}

/// Every hexagon must overlap the image; otherwise the geometry belongs to
/// a different image.
fn check_geometry_fits(geom: &HexGeometry, height: usize, width: usize) -> Result<()> {
    let (w, h) = (width as f64, height as f64);
    for index in 0..geom.len() {
        let c = geom.coord(index);
        let (x, y) = geom.center_of(c.row as i64, c.col as i64);
        let hw = 0.5 * geom.h_spacing();
        if x + hw <= 0.0 || x - hw >= w || y + geom.circumradius <= 0.0 || y - geom.circumradius >= h {
            return Err(Error::dim(format!(
                "hex cell ({}, {}) lies outside the {height}x{width} image",
                c.row, c.col
            )));
        }
    }
    Ok(())
}

fn cubic_weight(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        (A + 2.0) * t.powi(3) - (A + 3.0) * t.powi(2) + 1.0
    } else if t < 2.0 {
        A * t.powi(3) - 5.0 * A * t.powi(2) + 8.0 * A * t - 4.0 * A
    } else {
        0.0
    }
}

fn sample_point(img: &SquareImage, x: f64, y: f64, method: Interpolation, out: &mut [f32]) {
    let clamp_r = |r: i64| r.clamp(0, img.height as i64 - 1) as usize;
    let clamp_c = |c: i64| c.clamp(0, img.width as i64 - 1) as usize;
    match method {
        Interpolation::Nearest => {
            let (r, c) = (clamp_r(y.floor() as i64), clamp_c(x.floor() as i64));
            out.copy_from_slice(img.pixel(r * img.width + c));
        }
        Interpolation::Bilinear => {
            let (u, v) = (x - 0.5, y - 0.5);
            let (c0, r0) = (u.floor(), v.floor());
            let (fx, fy) = (u - c0, v - r0);
            let (c0, r0) = (c0 as i64, r0 as i64);
            for (ch, o) in out.iter_mut().enumerate() {
                let g = |r: i64, c: i64| img.get(clamp_r(r), clamp_c(c), ch) as f64;
                let top = g(r0, c0) * (1.0 - fx) + g(r0, c0 + 1) * fx;
                let bot = g(r0 + 1, c0) * (1.0 - fx) + g(r0 + 1, c0 + 1) * fx;
                *o = (top * (1.0 - fy) + bot * fy) as f32;
            }
        }
        Interpolation::Bicubic => {
            let (u, v) = (x - 0.5, y - 0.5);
            let (c0, r0) = (u.floor() as i64, v.floor() as i64);
            let wx: Vec<f64> = (-1..=2).map(|k| cubic_weight(u - (c0 + k) as f64)).collect();
            let wy: Vec<f64> = (-1..=2).map(|k| cubic_weight(v - (r0 + k) as f64)).collect();
            for (ch, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, wyj) in wy.iter().enumerate() {
                    for (i, wxi) in wx.iter().enumerate() {
                        let r = clamp_r(r0 - 1 + j as i64);
                        let c = clamp_c(c0 - 1 + i as i64);
                        acc += wyj * wxi * img.get(r, c, ch) as f64;
                    }
                }
                *o = acc.clamp(0.0, 1.0) as f32;
            }
        }
        Interpolation::Area => unreachable!("area sampling is not point sampling"),
    }
}

/// Sample a square image onto a hexagonal grid.
pub fn square_to_hex(img: &SquareImage, geom: &HexGeometry, method: Interpolation) -> Result<HexImage> {
    check_geometry_fits(geom, img.height, img.width)?;
    if method == Interpolation::Area {
        let map = compute_overlap_map(geom, img.height, img.width);
        return square_to_hex_area(img, &map);
    }
    let mut data = vec![0.0f32; geom.len() * img.channels];
    for (index, out) in data.chunks_mut(img.channels).enumerate() {
        let c = geom.coord(index);
        let (x, y) = geom.center_of(c.row as i64, c.col as i64);
        sample_point(img, x, y, method, out);
    }
    HexImage::new(*geom, img.channels, data)
}

/// Area-weighted sampling with a precomputed overlap map.
pub fn square_to_hex_area(img: &SquareImage, map: &OverlapMap) -> Result<HexImage> {
    map.check_against(img.height, img.width, &map.geometry)?;
    let geom = map.geometry;
    let ch = img.channels;
    let mut acc = vec![0.0f64; geom.len() * ch];
    let mut weight = vec![0.0f64; geom.len()];
    for e in &map.entries {
        let h = map.hex_index(e);
        let p = img.pixel(map.pixel_index(e));
        weight[h] += e.area;
        for k in 0..ch {
            acc[h * ch + k] += e.area * p[k] as f64;
        }
    }
    let mut data = vec![0.0f32; geom.len() * ch];
    for h in 0..geom.len() {
        let out = &mut data[h * ch..(h + 1) * ch];
        if weight[h] > 0.0 {
            for k in 0..ch {
                out[k] = (acc[h * ch + k] / weight[h]).clamp(0.0, 1.0) as f32;
            }
        } else {
            let c = geom.coord(h);
            let (x, y) = geom.center_of(c.row as i64, c.col as i64);
            sample_point(img, x, y, Interpolation::Nearest, out);
        }
    }
    HexImage::new(geom, ch, data)
}

/// Square rendering method for [`hex_to_square`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SquareMethod {
    Nearest,
    Area,
}

/// Resample a hexagonal image back onto a `height x width` square grid.
pub fn hex_to_square(img: &HexImage, height: usize, width: usize, method: SquareMethod) -> Result<SquareImage> {
    check_geometry_fits(&img.geometry, height, width)?;
    match method {
        SquareMethod::Nearest => {
            let mut data = vec![0.0f32; height * width * img.channels];
            for (index, out) in data.chunks_mut(img.channels).enumerate() {
                let (row, col) = (index / width, index % width);
                let c = img
                    .geometry
                    .nearest_cell(col as f64 + 0.5, row as f64 + 0.5);
                out.copy_from_slice(img.cell(img.geometry.index(c)));
            }
            SquareImage::new(height, width, img.channels, data)
        }
        SquareMethod::Area => {
            let map = compute_overlap_map(&img.geometry, height, width);
            hex_to_square_area(img, &map)
        }
    }
}

/// Area-weighted rendering with a precomputed overlap map. Pixels not
/// touched by any hexagon take the nearest cell's value.
pub fn hex_to_square_area(img: &HexImage, map: &OverlapMap) -> Result<SquareImage> {
    map.check_against(map.height, map.width, &img.geometry)?;
    let (height, width, ch) = (map.height, map.width, img.channels);
    let mut acc = vec![0.0f64; height * width * ch];
    let mut weight = vec![0.0f64; height * width];
    for e in &map.entries {
        let p = map.pixel_index(e);
        let h = img.cell(map.hex_index(e));
        weight[p] += e.area;
        for k in 0..ch {
            acc[p * ch + k] += e.area * h[k] as f64;
        }
    }
    let mut data = vec![0.0f32; height * width * ch];
    for p in 0..height * width {
        let out = &mut data[p * ch..(p + 1) * ch];
        if weight[p] > 0.0 {
            for k in 0..ch {
                out[k] = (acc[p * ch + k] / weight[p]).clamp(0.0, 1.0) as f32;
            }
        } else {
            let c = img
                .geometry
                .nearest_cell((p % width) as f64 + 0.5, (p / width) as f64 + 0.5);
            out.copy_from_slice(img.cell(img.geometry.index(c)));
        }
    }
    SquareImage::new(height, width, ch, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize) -> SquareImage {
        let data = (0..h * w)
            .map(|i| ((i / w) + (i % w)) as f32 / (h + w - 2) as f32)
            .collect();
        SquareImage::new(h, w, 1, data).unwrap()
    }

    #[test]
    fn fit_reproduces_34_by_30() {
        let g = fit_hex_geometry(32, 32).unwrap();
        assert_eq!((g.rows, g.cols), (34, 30));
        assert!((g.cell_area() - 1.0).abs() < 1e-12);
        let (cx, cy) = g.bbox_center();
        assert!((cx - 16.0).abs() < 1e-12 && (cy - 16.0).abs() < 1e-12);
    }

    #[test]
    fn fit_small_images() {
        let g = fit_hex_geometry(2, 2).unwrap();
        assert!(g.rows >= 2 && g.cols >= 1);
        let (x0, y0, x1, y1) = g.bounding_box();
        assert!(x0 <= 0.0 && y0 <= 0.0 && x1 >= 2.0 && y1 >= 2.0);
        assert!(fit_hex_geometry(1, 5).is_err());
    }

    #[test]
    fn fit_28_covers_the_image() {
        let g = fit_hex_geometry(28, 28).unwrap();
        assert_eq!((g.rows, g.cols), (30, 26));
        let (x0, y0, x1, y1) = g.bounding_box();
        assert!(x0 <= 0.0 && y0 <= 0.0 && x1 >= 28.0 && y1 >= 28.0);
    }

    #[test]
    fn rect_clip_of_square() {
        let sq = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)];
        let c = clip_to_rect(&sq, 1.0, 1.0, 3.0, 3.0);
        assert!((polygon_area(&c) - 1.0).abs() < 1e-15);
        assert!(clip_to_rect(&sq, 5.0, 5.0, 6.0, 6.0).is_empty());
    }

    #[test]
    fn hexagon_inside_one_pixel() {
        let g = HexGeometry::new(1, 1, 0.3, 1.5, 1.5).unwrap();
        let map = compute_overlap_map(&g, 3, 3);
        assert_eq!(map.entries.len(), 1);
        assert_eq!(map.entries[0].pixel, (1, 1));
        assert!((map.entries[0].area - 1.5 * SQRT_3 * 0.09).abs() < 1e-12);
    }

    #[test]
    fn hexagon_on_pixel_corner() {
        let g = HexGeometry::new(1, 1, 0.6, 2.0, 2.0).unwrap();
        let map = compute_overlap_map(&g, 4, 4);
        assert_eq!(map.entries.len(), 4);
        let sum: f64 = map.entries.iter().map(|e| e.area).sum();
        assert!((sum - g.cell_area()).abs() < 1e-12);
        for e in &map.entries {
            assert!((e.area - g.cell_area() / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fitted_map_partitions_interior() {
        let g = fit_hex_geometry(16, 16).unwrap();
        let map = compute_overlap_map(&g, 16, 16);
        let cov = map.pixel_coverage();
        for row in 2..14 {
            for col in 2..14 {
                assert!((cov[row * 16 + col] - 1.0).abs() < 1e-9);
            }
        }
        let hcov = map.hex_coverage();
        for i in 0..g.len() {
            let verts = g.vertices(g.coord(i));
            if verts.iter().all(|&(x, y)| (0.0..=16.0).contains(&x) && (0.0..=16.0).contains(&y)) {
                assert!((hcov[i] - 1.0).abs() < 1e-9);
            }
        }
        assert!(map.entries.iter().all(|e| e.area >= MIN_OVERLAP_AREA));
    }

    #[test]
    fn constant_image_any_method() {
        let img = SquareImage::filled(12, 10, 3, 0.375).unwrap();
        let g = fit_hex_geometry(12, 10).unwrap();
        for m in [
            Interpolation::Nearest,
            Interpolation::Bilinear,
            Interpolation::Bicubic,
            Interpolation::Area,
        ] {
            let h = square_to_hex(&img, &g, m).unwrap();
            assert!(h.data.iter().all(|&v| (v - 0.375).abs() < 1e-6), "{m:?}");
            for back in [SquareMethod::Nearest, SquareMethod::Area] {
                let s = hex_to_square(&h, 12, 10, back).unwrap();
                assert!(s.data.iter().all(|&v| (v - 0.375).abs() < 1e-6));
            }
        }
    }

    #[test]
    fn bilinear_at_pixel_center_is_exact() {
        let img = ramp(5, 5);
        let g = HexGeometry::new(1, 1, 0.5, 2.5, 3.5).unwrap();
        let h = square_to_hex(&img, &g, Interpolation::Bilinear).unwrap();
        assert_eq!(h.data[0], img.get(3, 2, 0));
        let h = square_to_hex(&img, &g, Interpolation::Bicubic).unwrap();
        assert!((h.data[0] - img.get(3, 2, 0)).abs() < 1e-7);
    }

    #[test]
    fn area_sampling_matches_direct_summation() {
        let img = ramp(4, 4);
        let g = fit_hex_geometry(4, 4).unwrap();
        let map = compute_overlap_map(&g, 4, 4);
        let h = square_to_hex(&img, &g, Interpolation::Area).unwrap();
        for i in 0..g.len() {
            let (mut num, mut den) = (0.0, 0.0);
            for e in map.entries.iter().filter(|e| g.index(e.hex) == i) {
                num += e.area * img.get(e.pixel.0, e.pixel.1, 0) as f64;
                den += e.area;
            }
            assert!((h.data[i] as f64 - num / den).abs() < 1e-6);
        }
    }

    #[test]
    fn mismatched_geometry_rejected() {
        let img = SquareImage::filled(8, 8, 1, 0.5).unwrap();
        let far = HexGeometry::new(2, 2, 0.6, 100.0, 100.0).unwrap();
        assert!(matches!(
            square_to_hex(&img, &far, Interpolation::Nearest),
            Err(Error::Dimension(_))
        ));
        let h = HexImage::filled(far, 1, 0.5).unwrap();
        assert!(hex_to_square(&h, 8, 8, SquareMethod::Area).is_err());
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert!(SquareImage::new(1, 2, 1, vec![0.5, 1.5]).is_err());
        assert!(SquareImage::new(1, 2, 1, vec![0.5]).is_err());
    }

    #[test]
    fn interpolation_stays_in_input_range() {
        let data: Vec<f32> = (0..64).map(|i| ((i * 37) % 11) as f32 / 20.0 + 0.2).collect();
        let (lo, hi) = data
            .iter()
            .fold((f32::MAX, f32::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        let img = SquareImage::new(8, 8, 1, data).unwrap();
        let g = fit_hex_geometry(8, 8).unwrap();
        for m in [Interpolation::Nearest, Interpolation::Bilinear, Interpolation::Area] {
            let h = square_to_hex(&img, &g, m).unwrap();
            assert!(h.data.iter().all(|&v| v >= lo - 1e-6 && v <= hi + 1e-6));
        }
    }

    #[test]
    fn area_sampling_conserves_intensity() {
        let data: Vec<f32> = (0..64).map(|i| ((i * 13) % 7) as f32 / 7.0).collect();
        let img = SquareImage::new(8, 8, 1, data).unwrap();
        let g = fit_hex_geometry(8, 8).unwrap();
        let map = compute_overlap_map(&g, 8, 8);
        let h = square_to_hex_area(&img, &map).unwrap();
        let cov = map.hex_coverage();
        let pcov = map.pixel_coverage();
        let hex_side: f64 = (0..g.len()).map(|i| cov[i] * h.data[i] as f64).sum();
        let sq_side: f64 = (0..64).map(|p| pcov[p] * img.data[p] as f64).sum();
        assert!((hex_side - sq_side).abs() <= 1e-6 * sq_side.abs());
    }

    #[test]
    fn resampling_is_deterministic() {
        let img = ramp(9, 7);
        let g = fit_hex_geometry(9, 7).unwrap();
        let a = square_to_hex(&img, &g, Interpolation::Bicubic).unwrap();
        let b = square_to_hex(&img, &g, Interpolation::Bicubic).unwrap();
        assert_eq!(a, b);
    }
}
