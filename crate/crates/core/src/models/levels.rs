//! Resolution pyramids shared by the models.

use std::sync::Arc;

use crate::hexgrid::HexGeometry;
use crate::layers::{build_pool_mapping_for, Grouping, PoolMapping, Stencil};
use crate::resample::fit_hex_geometry;
use crate::Result;

/// One square resolution level. Cells are `2^k` input pixels wide.
#[derive(Debug, Clone)]
pub struct SquareLevel {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: f64,
    pub stencil: Arc<Stencil>,
    /// Pooling onto the next coarser level.
    pub pool: Arc<Grouping>,
}

impl SquareLevel {
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn center(&self, cell: usize) -> (f64, f64) {
        let (r, c) = (cell / self.cols, cell % self.cols);
        ((c as f64 + 0.5) * self.cell_size, (r as f64 + 0.5) * self.cell_size)
    }

    /// Cell containing `(x, y)`, clamped to the grid.
    pub fn cell_at(&self, x: f64, y: f64) -> usize {
        let c = ((x / self.cell_size).floor().max(0.0) as usize).min(self.cols - 1);
        let r = ((y / self.cell_size).floor().max(0.0) as usize).min(self.rows - 1);
        r * self.cols + c
    }
}

/// `count + 1` levels from `height x width` by ceil-halving.
pub fn square_levels(height: usize, width: usize, count: usize) -> Vec<SquareLevel> {
    let (mut rows, mut cols, mut size) = (height, width, 1.0);
    let mut out = Vec::with_capacity(count + 1);
    for _ in 0..=count {
        out.push(SquareLevel {
            rows,
            cols,
            cell_size: size,
            stencil: Arc::new(Stencil::square3x3(rows, cols)),
            pool: Arc::new(Grouping::square2x2(rows, cols)),
        });
        rows = rows.div_ceil(2);
        cols = cols.div_ceil(2);
        size *= 2.0;
    }
    out
}

#[derive(Debug, Clone)]
pub struct HexLevel {
    pub geometry: HexGeometry,
    pub stencil: Arc<Stencil>,
    /// Pooling onto the next coarser level.
    pub pool: Arc<PoolMapping>,
}

/// `count + 1` hexagonal levels starting from the grid fitted to
/// `height x width`; each level doubles the circumradius about the image
/// center.
pub fn hex_levels(height: usize, width: usize, count: usize) -> Result<Vec<HexLevel>> {
    let mut geometry = fit_hex_geometry(height, width)?;
    let mut out = Vec::with_capacity(count + 1);
    for _ in 0..=count {
        let pool = Arc::new(build_pool_mapping_for(&geometry));
        out.push(HexLevel {
            geometry,
            stencil: Arc::new(Stencil::hex(geometry.rows, geometry.cols)),
            pool: Arc::clone(&pool),
        });
        geometry = pool.output;
    }
    Ok(out)
}
