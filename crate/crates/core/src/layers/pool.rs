//! Grouped pooling and unpooling. A [`Grouping`] partitions the input
//! cells; output cell `o` aggregates `group(o)`.

use std::sync::Arc;

use super::assignment::solve_assignment;
use crate::hexgrid::{HexCoord, HexGeometry};
use crate::tensor::{Tape, Tensor, Var};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    in_cells: usize,
    groups: Vec<Vec<u32>>,
    owner: Vec<u32>,
}

impl Grouping {
    /// Groups must partition `0..in_cells`. Members are stored sorted.
    pub fn new(in_cells: usize, mut groups: Vec<Vec<u32>>) -> Result<Self> {
        let mut owner = vec![u32::MAX; in_cells];
        for (o, g) in groups.iter_mut().enumerate() {
            if g.is_empty() {
                return Err(Error::Integrity(format!("pool group {o} is empty")));
            }
            g.sort_unstable();
            for &i in g.iter() {
                let slot = owner
                    .get_mut(i as usize)
                    .ok_or_else(|| Error::Integrity(format!("cell {i} outside {in_cells} inputs")))?;
                if *slot != u32::MAX {
                    return Err(Error::Integrity(format!("cell {i} in two pool groups")));
                }
                *slot = o as u32;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == u32::MAX) {
            return Err(Error::Integrity(format!("cell {i} in no pool group")));
        }
        Ok(Grouping {
            in_cells,
            groups,
            owner,
        })
    }

    /// 2x2 windows with ceil-halving; trailing windows are partial.
    pub fn square2x2(rows: usize, cols: usize) -> Self {
        let (orows, ocols) = (rows.div_ceil(2), cols.div_ceil(2));
        let mut groups = Vec::with_capacity(orows * ocols);
        for r in 0..orows {
            for c in 0..ocols {
                let mut g = Vec::with_capacity(4);
                for rr in 2 * r..(2 * r + 2).min(rows) {
                    for cc in 2 * c..(2 * c + 2).min(cols) {
                        g.push((rr * cols + cc) as u32);
                    }
                }
                groups.push(g);
            }
        }
        Grouping::new(rows * cols, groups).expect("2x2 windows partition the grid")
    }

    pub fn in_cells(&self) -> usize {
        self.in_cells
    }

    pub fn out_cells(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, out: usize) -> &[u32] {
        &self.groups[out]
    }

    pub fn groups(&self) -> &[Vec<u32>] {
        &self.groups
    }

    pub fn owner(&self, cell: usize) -> usize {
        self.owner[cell] as usize
    }
}

/// Hexagonal pooling correspondence between a grid and its ceil-halved
/// coarser level.
#[derive(Debug, Clone)]
pub struct PoolMapping {
    pub input: HexGeometry,
    pub output: HexGeometry,
    pub grouping: Arc<Grouping>,
    /// Sum of squared distances between group centroids and their output
    /// cell centers, in input units.
    pub cost: f64,
}

impl PoolMapping {
    pub fn in_shape(&self) -> (usize, usize) {
        self.input.shape()
    }

    pub fn out_shape(&self) -> (usize, usize) {
        self.output.shape()
    }
}

/// Mapping for an abstract `rows x cols` grid with unit circumradius.
pub fn build_pool_mapping(rows: usize, cols: usize) -> Result<PoolMapping> {
    let g = HexGeometry::new(rows, cols, 1.0, 0.0, 0.0)?;
    Ok(build_pool_mapping_for(&g))
}

/// Anchors on the even-row, even-column sublattice each seed one group.
/// Every cell joins the nearest anchor whose 7-cell neighborhood holds it,
/// else the nearest anchor; ties go to the lowest `(row, col)`. Groups are
/// then paired with output cells by minimum squared centroid distance.
pub fn build_pool_mapping_for(input: &HexGeometry) -> PoolMapping {
    let output = input.coarsened();
    let (rows, cols) = input.shape();
    let anchors: Vec<HexCoord> = (0..rows)
        .step_by(2)
        .flat_map(|r| (0..cols).step_by(2).map(move |c| HexCoord::new(r, c)))
        .collect();
    let anchor_slot = |c: HexCoord| (c.row % 2 == 0 && c.col % 2 == 0).then(|| (c.row / 2) * cols.div_ceil(2) + c.col / 2);
    let centers = input.centers();
    let dist2 = |a: usize, b: HexCoord| {
        let (x0, y0) = centers[a];
        let (x1, y1) = centers[input.index(b)];
        (x0 - x1).powi(2) + (y0 - y1).powi(2)
    };
    let nearest = |cell: usize, cands: &mut dyn Iterator<Item = HexCoord>| {
        cands
            .map(|a| (dist2(cell, a), a))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .map(|(_, a)| a)
    };

    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); anchors.len()];
    for cell in 0..input.len() {
        let coord = input.coord(cell);
        let nb = input.neighbors(coord).expect("cell in grid");
        let mut local = std::iter::once(coord)
            .chain(nb.iter().filter_map(|n| n.coord()))
            .filter(|c| anchor_slot(*c).is_some());
        let chosen = nearest(cell, &mut local)
            .or_else(|| nearest(cell, &mut anchors.iter().copied()))
            .expect("at least one anchor");
        groups[anchor_slot(chosen).unwrap()].push(cell as u32);
    }

    let centroids: Vec<(f64, f64)> = groups
        .iter()
        .map(|g| {
            let n = g.len() as f64;
            let (sx, sy) = g.iter().fold((0.0, 0.0), |(sx, sy), &i| {
                (sx + centers[i as usize].0, sy + centers[i as usize].1)
            });
            (sx / n, sy / n)
        })
        .collect();
    let targets = output.centers();
    let n = groups.len();
    let cost: Vec<f64> = centroids
        .iter()
        .flat_map(|&(gx, gy)| targets.iter().map(move |&(tx, ty)| (gx - tx).powi(2) + (gy - ty).powi(2)))
        .collect();
    let (group_to_out, total) = solve_assignment(&cost, n);
    let mut ordered = vec![Vec::new(); n];
    for (g, &o) in group_to_out.iter().enumerate() {
        ordered[o] = std::mem::take(&mut groups[g]);
    }
    let grouping = Grouping::new(input.len(), ordered).expect("anchor groups partition the grid");
    PoolMapping {
        input: *input,
        output,
        grouping: Arc::new(grouping),
        cost: total,
    }
}

/// Argmax "where" switches of a max pooling: for each
/// `(sample, output cell, channel)` the winning input cell.
#[derive(Debug, Clone, PartialEq)]
pub struct WhereMask {
    pub grouping: Arc<Grouping>,
    pub batch: usize,
    pub channels: usize,
    pub argmax: Vec<u32>,
}

impl WhereMask {
    pub fn at(&self, n: usize, out: usize, c: usize) -> usize {
        self.argmax[(n * self.grouping.out_cells() + out) * self.channels + c] as usize
    }

    /// Every stored index lies in its output cell's group.
    pub fn validate(&self) -> Result<()> {
        let p = self.grouping.out_cells();
        if self.argmax.len() != self.batch * p * self.channels {
            return Err(Error::Integrity(format!(
                "where mask holds {} entries, expected {}",
                self.argmax.len(),
                self.batch * p * self.channels
            )));
        }
        for (k, &i) in self.argmax.iter().enumerate() {
            let o = (k / self.channels) % p;
            if self.grouping.group(o).binary_search(&i).is_err() {
                return Err(Error::Integrity(format!("where index {i} not in group of output cell {o}")));
            }
        }
        Ok(())
    }
}

fn check_cells(tape: &Tape, x: Var, cells: usize, what: &str) -> Result<(usize, usize)> {
    let s = tape.shape(x);
    if s.len() != 3 || s[1] != cells {
        return Err(Error::dim(format!("{what}: input {s:?}, expected [batch, {cells}, channels]")));
    }
    Ok((s[0], s[2]))
}

/// Max over each group; the first maximal member (lowest index) wins.
pub fn max_pool(tape: &mut Tape, x: Var, grouping: &Arc<Grouping>) -> Result<(Var, WhereMask)> {
    let (n, c) = check_cells(tape, x, grouping.in_cells(), "max pool")?;
    let (p_in, p_out) = (grouping.in_cells(), grouping.out_cells());
    let xd = tape.value(x).data();
    let mut out = Vec::with_capacity(n * p_out * c);
    let mut argmax = Vec::with_capacity(n * p_out * c);
    for b in 0..n {
        for g in grouping.groups() {
            for ch in 0..c {
                let mut best = (f64::NEG_INFINITY, g[0]);
                for &i in g {
                    let v = xd[(b * p_in + i as usize) * c + ch];
                    if v > best.0 {
                        best = (v, i);
                    }
                }
                out.push(best.0);
                argmax.push(best.1);
            }
        }
    }
    let mask = WhereMask {
        grouping: Arc::clone(grouping),
        batch: n,
        channels: c,
        argmax,
    };
    let value = Tensor::new(vec![n, p_out, c], out)?;
    let routes = Arc::new(route_indices(&mask, p_in));
    let y = tape.push(
        &[x],
        value,
        Box::new(move |g, _, _, _| {
            let mut gx = vec![0.0; n * p_in * c];
            for (&dst, &gv) in routes.iter().zip(g) {
                gx[dst] += gv;
            }
            vec![Some(gx)]
        }),
    );
    Ok((y, mask))
}

/// Flat input positions selected by a mask, in pooled-output order.
fn route_indices(mask: &WhereMask, p_in: usize) -> Vec<usize> {
    let (p_out, c) = (mask.grouping.out_cells(), mask.channels);
    mask.argmax
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let b = k / (p_out * c);
            (b * p_in + i as usize) * c + k % c
        })
        .collect()
}

pub fn avg_pool(tape: &mut Tape, x: Var, grouping: &Arc<Grouping>) -> Result<Var> {
    let (n, c) = check_cells(tape, x, grouping.in_cells(), "avg pool")?;
    let (p_in, p_out) = (grouping.in_cells(), grouping.out_cells());
    let xd = tape.value(x).data();
    let mut out = vec![0.0; n * p_out * c];
    for b in 0..n {
        for (o, g) in grouping.groups().iter().enumerate() {
            let dst = &mut out[(b * p_out + o) * c..(b * p_out + o + 1) * c];
            for &i in g {
                let src = &xd[(b * p_in + i as usize) * c..(b * p_in + i as usize + 1) * c];
                dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
            }
            let inv = 1.0 / g.len() as f64;
            dst.iter_mut().for_each(|d| *d *= inv);
        }
    }
    let value = Tensor::new(vec![n, p_out, c], out)?;
    let grouping = Arc::clone(grouping);
    Ok(tape.push(
        &[x],
        value,
        Box::new(move |g, _, _, _| {
            let mut gx = vec![0.0; n * p_in * c];
            for b in 0..n {
                for i in 0..p_in {
                    let o = grouping.owner(i);
                    let inv = 1.0 / grouping.group(o).len() as f64;
                    for ch in 0..c {
                        gx[(b * p_in + i) * c + ch] = g[(b * p_out + o) * c + ch] * inv;
                    }
                }
            }
            vec![Some(gx)]
        }),
    ))
}

/// Scatter each pooled value back to its recorded argmax; zeros elsewhere.
pub fn unpool_where(tape: &mut Tape, x: Var, mask: &WhereMask) -> Result<Var> {
    mask.validate()?;
    let p_out = mask.grouping.out_cells();
    let (n, c) = check_cells(tape, x, p_out, "unpool")?;
    if n != mask.batch || c != mask.channels {
        return Err(Error::Integrity(format!(
            "where mask for batch {} x {} channels applied to {:?}",
            mask.batch,
            mask.channels,
            tape.shape(x)
        )));
    }
    let p_in = mask.grouping.in_cells();
    let routes = Arc::new(route_indices(mask, p_in));
    let mut out = vec![0.0; n * p_in * c];
    for (&dst, &v) in routes.iter().zip(tape.value(x).data()) {
        out[dst] = v;
    }
    let value = Tensor::new(vec![n, p_in, c], out)?;
    Ok(tape.push(
        &[x],
        value,
        Box::new(move |g, _, _, _| vec![Some(routes.iter().map(|&i| g[i]).collect())]),
    ))
}

/// Copy each pooled value to every member of its group.
pub fn unpool_replicate(tape: &mut Tape, x: Var, grouping: &Arc<Grouping>) -> Result<Var> {
    let (n, c) = check_cells(tape, x, grouping.out_cells(), "unpool")?;
    let (p_in, p_out) = (grouping.in_cells(), grouping.out_cells());
    let idx: Vec<usize> = (0..n)
        .flat_map(|b| (0..p_in).map(move |i| (b, i)))
        .flat_map(|(b, i)| {
            let o = grouping.owner(i);
            (0..c).map(move |ch| (b * p_out + o) * c + ch)
        })
        .collect();
    let flat = tape.reshape(x, &[n * p_out * c])?;
    let y = tape.gather(flat, Arc::new(idx))?;
    tape.reshape(y, &[n, p_in, c])
}
