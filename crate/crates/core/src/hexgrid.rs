//! Hexagonal lattice geometry and addressing.
//!
//! Cells are pointy-top regular hexagons stored in a rectangular
//! `rows x cols` array. Every odd row is shifted right by half a horizontal
//! spacing ("odd-r" offset layout). Row 0 is at the top and rows grow
//! downward, matching image raster order, so "north" means `row - 1`.
//!
//! Spiral (septree) addresses are used only to order kernel taps and to
//! enumerate Hexarrays; storage is always the linewise offset array.

use crate::{Error, Result};

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Six neighbor directions, counterclockwise on screen starting East.
///
/// The spiral digit `d` in `1..=6` is bound to `Direction::ALL[d - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    East,
    NorthEast,
    NorthWest,
    West,
    SouthWest,
    SouthEast,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::East,
        Direction::NorthEast,
        Direction::NorthWest,
        Direction::West,
        Direction::SouthWest,
        Direction::SouthEast,
    ];

    /// Axial unit step.
    pub fn axial(self) -> Axial {
        match self {
            Direction::East => Axial::new(1, 0),
            Direction::NorthEast => Axial::new(1, -1),
            Direction::NorthWest => Axial::new(0, -1),
            Direction::West => Axial::new(-1, 0),
            Direction::SouthWest => Axial::new(-1, 1),
            Direction::SouthEast => Axial::new(0, 1),
        }
    }

    /// `(drow, dcol)` offset step from a cell on a row with the given parity.
    ///
    /// | dir | even row | odd row |
    /// |-----|----------|---------|
    /// | E   | (0, +1)  | (0, +1) |
    /// | NE  | (-1, 0)  | (-1, +1)|
    /// | NW  | (-1, -1) | (-1, 0) |
    /// | W   | (0, -1)  | (0, -1) |
    /// | SW  | (+1, -1) | (+1, 0) |
    /// | SE  | (+1, 0)  | (+1, +1)|
    pub fn offset(self, odd_row: bool) -> (i64, i64) {
        let shift = odd_row as i64;
        match self {
            Direction::East => (0, 1),
            Direction::NorthEast => (-1, shift),
            Direction::NorthWest => (-1, shift - 1),
            Direction::West => (0, -1),
            Direction::SouthWest => (1, shift - 1),
            Direction::SouthEast => (1, shift),
        }
    }
}

/// Axial lattice coordinate (or displacement): `x = w * (q + r / 2)`,
/// `y = 1.5 * R * r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Axial {
    pub q: i64,
    pub r: i64,
}

impl Axial {
    pub const fn new(q: i64, r: i64) -> Self {
        Axial { q, r }
    }

    pub fn add(self, other: Axial) -> Axial {
        Axial::new(self.q + other.q, self.r + other.r)
    }

    /// One septree level up: scales by sqrt(7) and rotates by
    /// atan(sqrt(3) / 5), mapping `East` onto `2 * East + SouthEast`.
    pub fn septree_scale(self) -> Axial {
        Axial::new(2 * self.q - self.r, self.q + 3 * self.r)
    }

    /// Hexagonal (cube) distance from the origin.
    pub fn hex_len(self) -> i64 {
        let s = -self.q - self.r;
        self.q.abs().max(self.r.abs()).max(s.abs())
    }

    /// Convert an axial displacement into an offset displacement relative to
    /// an anchor on `anchor_row`.
    pub fn to_offset_from(self, anchor_row: i64, anchor_col: i64) -> (i64, i64) {
        let q0 = anchor_col - (anchor_row - (anchor_row & 1)) / 2;
        let row = anchor_row + self.r;
        let col = q0 + self.q + (row - (row & 1)) / 2;
        (self.r, col - anchor_col)
    }
}

/// Offset grid coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HexCoord {
    pub row: usize,
    pub col: usize,
}

impl HexCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        HexCoord { row, col }
    }
}

/// One entry of [`HexGeometry::neighbors`]. Coordinates may be negative or
/// beyond the grid when `in_bounds` is false.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub direction: Direction,
    pub row: i64,
    pub col: i64,
    pub in_bounds: bool,
}

impl Neighbor {
    pub fn coord(&self) -> Option<HexCoord> {
        self.in_bounds
            .then(|| HexCoord::new(self.row as usize, self.col as usize))
    }
}

/// Placement of a `rows x cols` odd-r pointy-top lattice in the plane.
///
/// Units are square-pixel sides; `(origin_x, origin_y)` is the center of
/// cell `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HexGeometry {
    pub rows: usize,
    pub cols: usize,
    pub circumradius: f64,
    pub origin_x: f64,
    pub origin_y: f64,
}

impl HexGeometry {
    pub fn new(
        rows: usize,
        cols: usize,
        circumradius: f64,
        origin_x: f64,
        origin_y: f64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Domain(format!("empty hex grid {rows}x{cols}")));
        }
        if !(circumradius > 0.0 && circumradius.is_finite()) {
            return Err(Error::Domain(format!(
                "circumradius must be positive, got {circumradius}"
            )));
        }
        Ok(HexGeometry {
            rows,
            cols,
            circumradius,
            origin_x,
            origin_y,
        })
    }

    /// Grid whose hexagon-union bounding box is centered on `(cx, cy)`.
    pub fn centered(rows: usize, cols: usize, circumradius: f64, cx: f64, cy: f64) -> Result<Self> {
        let mut g = HexGeometry::new(rows, cols, circumradius, 0.0, 0.0)?;
        let (x0, y0, x1, y1) = g.bounding_box();
        g.origin_x = cx - 0.5 * (x0 + x1);
        g.origin_y = cy - 0.5 * (y0 + y1);
        Ok(g)
    }

    pub fn h_spacing(&self) -> f64 {
        SQRT_3 * self.circumradius
    }

    pub fn v_spacing(&self) -> f64 {
        1.5 * self.circumradius
    }

    pub fn cell_area(&self) -> f64 {
        1.5 * SQRT_3 * self.circumradius * self.circumradius
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn contains(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.rows && (col as usize) < self.cols
    }

    fn check(&self, c: HexCoord) -> Result<()> {
        if c.row < self.rows && c.col < self.cols {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                row: c.row as i64,
                col: c.col as i64,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn index(&self, c: HexCoord) -> usize {
        c.row * self.cols + c.col
    }

    pub fn coord(&self, index: usize) -> HexCoord {
        HexCoord::new(index / self.cols, index % self.cols)
    }

    /// Cartesian center of cell `c`.
    pub fn center(&self, c: HexCoord) -> Result<(f64, f64)> {
        self.check(c)?;
        Ok(self.center_of(c.row as i64, c.col as i64))
    }

    /// Center of any lattice position, including ones outside the grid.
    pub fn center_of(&self, row: i64, col: i64) -> (f64, f64) {
        let shift = if row.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
        (
            self.origin_x + (col as f64 + shift) * self.h_spacing(),
            self.origin_y + row as f64 * self.v_spacing(),
        )
    }

    /// Centers of every cell in row-major order.
    pub fn centers(&self) -> Vec<(f64, f64)> {
        (0..self.rows as i64)
            .flat_map(|r| (0..self.cols as i64).map(move |c| (r, c)))
            .map(|(r, c)| self.center_of(r, c))
            .collect()
    }

    /// Hexagon corners, counterclockwise on screen starting at the top vertex.
    pub fn vertices(&self, c: HexCoord) -> [(f64, f64); 6] {
        let (cx, cy) = self.center_of(c.row as i64, c.col as i64);
        hexagon_vertices(cx, cy, self.circumradius)
    }

    /// `(min_x, min_y, max_x, max_y)` of the union of all hexagons.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let w = self.h_spacing();
        let shift = if self.rows > 1 { 0.5 } else { 0.0 };
        let min_x = self.origin_x - 0.5 * w;
        let max_x = self.origin_x + (self.cols as f64 - 1.0 + shift) * w + 0.5 * w;
        let min_y = self.origin_y - self.circumradius;
        let max_y = self.origin_y + (self.rows as f64 - 1.0) * self.v_spacing() + self.circumradius;
        (min_x, min_y, max_x, max_y)
    }

    pub fn bbox_center(&self) -> (f64, f64) {
        let (x0, y0, x1, y1) = self.bounding_box();
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }

    /// Next coarser level: ceil-halved shape, doubled circumradius, same
    /// bounding-box center.
    pub fn coarsened(&self) -> HexGeometry {
        let (cx, cy) = self.bbox_center();
        HexGeometry::centered(
            self.rows.div_ceil(2),
            self.cols.div_ceil(2),
            2.0 * self.circumradius,
            cx,
            cy,
        )
        .expect("coarsening a valid geometry")
    }

    /// The six neighbors of `c` in [`Direction::ALL`] order.
    pub fn neighbors(&self, c: HexCoord) -> Result<[Neighbor; 6]> {
        self.check(c)?;
        let odd = c.row % 2 == 1;
        Ok(Direction::ALL.map(|direction| {
            let (dr, dc) = direction.offset(odd);
            let row = c.row as i64 + dr;
            let col = c.col as i64 + dc;
            Neighbor {
                direction,
                row,
                col,
                in_bounds: self.contains(row, col),
            }
        }))
    }

    /// Cell whose center is nearest to `(x, y)`, clamped to the grid.
    pub fn nearest_cell(&self, x: f64, y: f64) -> HexCoord {
        let approx_row = ((y - self.origin_y) / self.v_spacing()).round() as i64;
        let mut best = (f64::INFINITY, HexCoord::new(0, 0));
        for row in (approx_row - 2)..=(approx_row + 2) {
            let row = row.clamp(0, self.rows as i64 - 1);
            let shift = if row % 2 == 1 { 0.5 } else { 0.0 };
            let approx_col = ((x - self.origin_x) / self.h_spacing() - shift).round() as i64;
            for col in (approx_col - 1)..=(approx_col + 1) {
                let col = col.clamp(0, self.cols as i64 - 1);
                let (cx, cy) = self.center_of(row, col);
                let d = (cx - x).powi(2) + (cy - y).powi(2);
                let cand = HexCoord::new(row as usize, col as usize);
                if d < best.0 || (d == best.0 && cand < best.1) {
                    best = (d, cand);
                }
            }
        }
        best.1
    }
}

pub fn hexagon_vertices(cx: f64, cy: f64, r: f64) -> [(f64, f64); 6] {
    let hw = 0.5 * SQRT_3 * r;
    [
        (cx, cy - r),
        (cx - hw, cy - 0.5 * r),
        (cx - hw, cy + 0.5 * r),
        (cx, cy + r),
        (cx + hw, cy + 0.5 * r),
        (cx + hw, cy - 0.5 * r),
    ]
}

/// Base-7 spiral address, most significant digit first.
///
/// Digit 0 is the center of its block and digits 1..=6 follow
/// [`Direction::ALL`]. A digit at level `k` (counting from the least
/// significant) contributes `S^k(u(d))`, where `u` is the unit step and `S`
/// is [`Axial::septree_scale`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpiralAddress {
    digits: Vec<u8>,
}

impl SpiralAddress {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = digits.iter().find(|&&d| d > 6) {
            return Err(Error::InvalidAddress(bad));
        }
        Ok(SpiralAddress { digits })
    }

    /// Address of the `index`-th cell of an order-`order` Hexarray.
    pub fn from_index(mut index: usize, order: usize) -> Self {
        let mut digits = vec![0u8; order];
        for d in digits.iter_mut().rev() {
            *d = (index % 7) as u8;
            index /= 7;
        }
        SpiralAddress { digits }
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn order(&self) -> usize {
        self.digits.len()
    }

    /// Axial displacement of this address from the Hexarray center.
    pub fn displacement(&self) -> Axial {
        self.digits.iter().fold(Axial::default(), |acc, &d| {
            let step = if d == 0 {
                Axial::default()
            } else {
                Direction::ALL[d as usize - 1].axial()
            };
            acc.septree_scale().add(step)
        })
    }

    /// `(drow, dcol)` displacement relative to an anchor cell.
    pub fn offset_from(&self, anchor: HexCoord) -> (i64, i64) {
        self.displacement()
            .to_offset_from(anchor.row as i64, anchor.col as i64)
    }
}

/// Axial displacement of a spiral address; see [`SpiralAddress::displacement`].
pub fn spiral_to_offset(addr: &SpiralAddress) -> Axial {
    addr.displacement()
}

/// All `7^order` cells of a Hexarray in spiral order.
pub fn hexarray(order: usize) -> Vec<(SpiralAddress, Axial)> {
    (0..7usize.pow(order as u32))
        .map(|i| {
            let a = SpiralAddress::from_index(i, order);
            let d = a.displacement();
            (a, d)
        })
        .collect()
}

/// Kernel taps as `(drow, dcol)` offsets, one table per anchor-row parity.
/// Tap `t` corresponds to spiral digit `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelOffsets {
    pub even: Vec<(i64, i64)>,
    pub odd: Vec<(i64, i64)>,
}

impl KernelOffsets {
    pub fn taps(&self) -> usize {
        self.even.len()
    }

    pub fn for_row(&self, row: usize) -> &[(i64, i64)] {
        if row % 2 == 1 {
            &self.odd
        } else {
            &self.even
        }
    }
}

/// Offsets of the hexagonal kernel of the given radius (0 or 1).
pub fn kernel_offsets(radius: usize) -> Result<KernelOffsets> {
    let order = match radius {
        0 => 0,
        1 => 1,
        other => return Err(Error::UnsupportedRadius(other)),
    };
    let table = |row: i64| {
        hexarray(order)
            .into_iter()
            .map(|(_, d)| d.to_offset_from(row, 0))
            .collect::<Vec<_>>()
    };
    Ok(KernelOffsets {
        even: table(0),
        odd: table(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn unit(rows: usize, cols: usize) -> HexGeometry {
        HexGeometry::new(rows, cols, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn centers_follow_odd_row_shift() {
        let g = unit(4, 5);
        assert_eq!(g.center(HexCoord::new(0, 0)).unwrap(), (0.0, 0.0));
        let (x, y) = g.center(HexCoord::new(1, 0)).unwrap();
        assert!((x - SQRT_3 / 2.0).abs() < 1e-15 && (y - 1.5).abs() < 1e-15);
        let (x, y) = g.center(HexCoord::new(2, 3)).unwrap();
        assert!((x - 3.0 * SQRT_3).abs() < 1e-12 && (y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn center_out_of_bounds() {
        let g = unit(2, 2);
        assert!(matches!(
            g.center(HexCoord::new(2, 0)),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn invalid_geometry() {
        assert!(HexGeometry::new(0, 3, 1.0, 0.0, 0.0).is_err());
        assert!(HexGeometry::new(3, 3, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn interior_neighbors_are_equidistant() {
        let g = HexGeometry::new(6, 6, 0.7, 1.3, -2.0).unwrap();
        for row in 1..5 {
            for col in 1..5 {
                let c = HexCoord::new(row, col);
                let (cx, cy) = g.center(c).unwrap();
                for n in g.neighbors(c).unwrap() {
                    assert!(n.in_bounds);
                    let (x, y) = g.center(n.coord().unwrap()).unwrap();
                    let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
                    assert!((d - g.h_spacing()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn corner_has_few_neighbors() {
        let g = unit(4, 4);
        let n = g.neighbors(HexCoord::new(0, 0)).unwrap();
        assert!(n.iter().filter(|n| n.in_bounds).count() <= 3);
    }

    #[test]
    fn neighbors_match_brute_force_nearest_centers() {
        let g = unit(4, 4);
        let c = HexCoord::new(1, 1);
        let (cx, cy) = g.center(c).unwrap();
        let mut dists: Vec<(f64, HexCoord)> = (0..g.len())
            .map(|i| g.coord(i))
            .filter(|&o| o != c)
            .map(|o| {
                let (x, y) = g.center(o).unwrap();
                ((x - cx).hypot(y - cy), o)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let min = dists[0].0;
        let nearest: HashSet<HexCoord> = dists
            .iter()
            .filter(|(d, _)| (d - min).abs() < 1e-9)
            .map(|&(_, o)| o)
            .collect();
        let got: HashSet<HexCoord> = g
            .neighbors(c)
            .unwrap()
            .iter()
            .filter_map(|n| n.coord())
            .collect();
        assert_eq!(nearest.len(), 6);
        assert_eq!(got, nearest);
    }

    #[test]
    fn neighbor_directions_are_counterclockwise_from_east() {
        let g = unit(5, 5);
        let c = HexCoord::new(2, 2);
        let (cx, cy) = g.center(c).unwrap();
        let angles: Vec<f64> = g
            .neighbors(c)
            .unwrap()
            .iter()
            .map(|n| {
                let (x, y) = g.center(n.coord().unwrap()).unwrap();
                // screen y points down; flip for the usual math angle
                (-(y - cy)).atan2(x - cx).to_degrees().rem_euclid(360.0)
            })
            .collect();
        for (k, a) in angles.iter().enumerate() {
            assert!((a - 60.0 * k as f64).abs() < 1e-9, "{angles:?}");
        }
    }

    #[test]
    fn spiral_digits() {
        let a = SpiralAddress::new(vec![0]).unwrap();
        assert_eq!(spiral_to_offset(&a), Axial::new(0, 0));
        let a = SpiralAddress::new(vec![3]).unwrap();
        assert_eq!(spiral_to_offset(&a), Direction::NorthWest.axial());
        assert!(matches!(
            SpiralAddress::new(vec![1, 7]),
            Err(Error::InvalidAddress(7))
        ));
        let a10 = SpiralAddress::new(vec![1, 0]).unwrap().displacement();
        let a01 = SpiralAddress::new(vec![0, 1]).unwrap().displacement();
        assert_ne!(a10, a01);
        assert_eq!(a10, Axial::new(2, 1));
    }

    #[test]
    fn hexarray_is_bijective() {
        for order in 0..=3 {
            let cells: HashSet<Axial> = hexarray(order).into_iter().map(|(_, d)| d).collect();
            assert_eq!(cells.len(), 7usize.pow(order as u32));
        }
    }

    #[test]
    fn order_one_hexarray_is_the_seven_point_neighborhood() {
        let cells: HashSet<Axial> = hexarray(1).into_iter().map(|(_, d)| d).collect();
        assert!(cells.iter().all(|d| d.hex_len() <= 1));
    }

    #[test]
    fn kernel_offsets_tables() {
        let k0 = kernel_offsets(0).unwrap();
        assert_eq!(k0.even, vec![(0, 0)]);
        assert_eq!(k0.odd, vec![(0, 0)]);
        let k1 = kernel_offsets(1).unwrap();
        assert_eq!(k1.taps(), 7);
        let differing: Vec<usize> = (0..7).filter(|&t| k1.even[t] != k1.odd[t]).collect();
        assert_eq!(differing, vec![2, 3, 5, 6]);
        for t in differing {
            assert_eq!(k1.even[t].0, k1.odd[t].0);
            assert_eq!(k1.odd[t].1 - k1.even[t].1, 1);
        }
        assert!(matches!(kernel_offsets(2), Err(Error::UnsupportedRadius(2))));
    }

    #[test]
    fn kernel_matches_neighbors_on_interior() {
        let g = unit(6, 6);
        let k = kernel_offsets(1).unwrap();
        for row in 1..5 {
            for col in 1..5 {
                let c = HexCoord::new(row, col);
                let from_kernel: Vec<(i64, i64)> = k
                    .for_row(row)
                    .iter()
                    .map(|&(dr, dc)| (row as i64 + dr, col as i64 + dc))
                    .collect();
                let mut expected = vec![(row as i64, col as i64)];
                expected.extend(g.neighbors(c).unwrap().iter().map(|n| (n.row, n.col)));
                assert_eq!(from_kernel, expected);
            }
        }
    }

    #[test]
    fn nearest_cell_recovers_centers() {
        let g = HexGeometry::new(7, 5, 0.62, 0.3, 0.4).unwrap();
        for i in 0..g.len() {
            let c = g.coord(i);
            let (x, y) = g.center(c).unwrap();
            assert_eq!(g.nearest_cell(x + 0.01, y - 0.02), c);
        }
    }

    #[test]
    fn coarsened_keeps_center() {
        let g = HexGeometry::centered(34, 30, 0.62, 16.0, 16.0).unwrap();
        let c = g.coarsened();
        assert_eq!(c.shape(), (17, 15));
        let (a, b) = (g.bbox_center(), c.bbox_center());
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kernel_is_center_plus_neighbors(rows in 1usize..12, cols in 1usize..12, seed in 0usize..1000) {
                let g = unit(rows, cols);
                let c = g.coord(seed % g.len());
                let k = kernel_offsets(1).unwrap();
                let taps: Vec<(i64, i64)> = k.for_row(c.row).iter()
                    .map(|&(dr, dc)| (c.row as i64 + dr, c.col as i64 + dc)).collect();
                prop_assert_eq!(taps[0], (c.row as i64, c.col as i64));
                for (t, n) in g.neighbors(c).unwrap().iter().enumerate() {
                    prop_assert_eq!(taps[t + 1], (n.row, n.col));
                }
            }

            #[test]
            fn kernel_is_period_two_in_rows(row in 0i64..50, col in 0i64..50) {
                let k = kernel_offsets(1).unwrap();
                let a = k.for_row(row as usize);
                let b = k.for_row(row as usize + 2);
                prop_assert_eq!(a, b);
                for (t, (dr, dc)) in a.iter().enumerate() {
                    let (dr2, dc2) = b[t];
                    prop_assert_eq!((row + dr + 2, col + dc), (row + 2 + dr2, col + dc2));
                }
            }
        }
    }
}
