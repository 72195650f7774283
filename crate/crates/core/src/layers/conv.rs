//! Stencil convolutions. A [`Stencil`] lists, for every output cell, the
//! input cell under each kernel tap; hexagonal 7-tap and square 3x3
//! kernels are both stencils on a flat cell index.

use std::sync::Arc;

use crate::hexgrid::kernel_offsets;
use crate::tensor::linalg::{gemm_nn, gemm_nt, gemm_tn};
use crate::tensor::{glorot_init_with, ParamStore, Rng, Tape, Tensor, Var};
use crate::{Error, Result};

const PAD: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stencil {
    rows: usize,
    cols: usize,
    taps: usize,
    index: Vec<u32>,
}

impl Stencil {
    /// Radius-1 hexagonal kernel on an odd-r `rows x cols` grid, taps in
    /// spiral digit order.
    pub fn hex(rows: usize, cols: usize) -> Self {
        let offsets = kernel_offsets(1).expect("radius 1 is supported");
        let mut index = Vec::with_capacity(rows * cols * 7);
        for r in 0..rows {
            for c in 0..cols {
                for &(dr, dc) in offsets.for_row(r) {
                    index.push(Self::lookup(rows, cols, r as i64 + dr, c as i64 + dc));
                }
            }
        }
        Stencil { rows, cols, taps: 7, index }
    }

    /// 3x3 kernel on a square `rows x cols` grid, taps row-major.
    pub fn square3x3(rows: usize, cols: usize) -> Self {
        let mut index = Vec::with_capacity(rows * cols * 9);
        for r in 0..rows as i64 {
            for c in 0..cols as i64 {
                for dr in -1..=1 {
                    for dc in -1..=1 {
                        index.push(Self::lookup(rows, cols, r + dr, c + dc));
                    }
                }
            }
        }
        Stencil { rows, cols, taps: 9, index }
    }

    fn lookup(rows: usize, cols: usize, r: i64, c: i64) -> u32 {
        if r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols {
            (r as usize * cols + c as usize) as u32
        } else {
            PAD
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    /// Input cell under `tap` of output `cell`; `None` in the zero padding.
    pub fn source(&self, cell: usize, tap: usize) -> Option<usize> {
        let i = self.index[cell * self.taps + tap];
        (i != PAD).then_some(i as usize)
    }

    /// `[n*cells, c*taps]`, column `ci * taps + t`.
    fn im2col(&self, x: &[f64], n: usize, c: usize) -> Vec<f64> {
        let (p, t) = (self.cells(), self.taps);
        let mut out = vec![0.0; n * p * c * t];
        for b in 0..n {
            let xb = &x[b * p * c..(b + 1) * p * c];
            for cell in 0..p {
                let row = &mut out[(b * p + cell) * c * t..(b * p + cell + 1) * c * t];
                for tap in 0..t {
                    let src = self.index[cell * t + tap];
                    if src == PAD {
                        continue;
                    }
                    let xs = &xb[src as usize * c..(src as usize + 1) * c];
                    for (ci, &v) in xs.iter().enumerate() {
                        row[ci * t + tap] = v;
                    }
                }
            }
        }
        out
    }

    /// Adjoint of [`Stencil::im2col`].
    fn col2im(&self, cols: &[f64], n: usize, c: usize) -> Vec<f64> {
        let (p, t) = (self.cells(), self.taps);
        let mut out = vec![0.0; n * p * c];
        for b in 0..n {
            let ob = &mut out[b * p * c..(b + 1) * p * c];
            for cell in 0..p {
                let row = &cols[(b * p + cell) * c * t..(b * p + cell + 1) * c * t];
                for tap in 0..t {
                    let src = self.index[cell * t + tap];
                    if src == PAD {
                        continue;
                    }
                    let os = &mut ob[src as usize * c..(src as usize + 1) * c];
                    for (ci, o) in os.iter_mut().enumerate() {
                        *o += row[ci * t + tap];
                    }
                }
            }
        }
        out
    }
}

fn check_input(tape: &Tape, x: Var, cells: usize, channels: usize, what: &str) -> Result<usize> {
    let s = tape.shape(x);
    if s.len() != 3 || s[1] != cells || s[2] != channels {
        return Err(Error::dim(format!(
            "{what}: input {s:?}, expected [batch, {cells}, {channels}]"
        )));
    }
    Ok(s[0])
}

/// `y[n, o, co] = sum_{ci, t} k[co, ci, t] * x[n, src(o, t), ci]`, kernel
/// shape `(cout, cin, taps)`.
pub fn stencil_conv(tape: &mut Tape, x: Var, kernel: Var, stencil: &Arc<Stencil>) -> Result<Var> {
    let ks = tape.shape(kernel).to_vec();
    if ks.len() != 3 || ks[2] != stencil.taps() {
        return Err(Error::dim(format!("kernel {ks:?} for a {}-tap stencil", stencil.taps())));
    }
    let (cout, cin, t) = (ks[0], ks[1], ks[2]);
    let n = check_input(tape, x, stencil.cells(), cin, "conv")?;
    let m = n * stencil.cells();
    let cols = stencil.im2col(tape.value(x).data(), n, cin);
    let mut y = vec![0.0; m * cout];
    gemm_nt(&cols, tape.value(kernel).data(), &mut y, m, cout, cin * t);
    let value = Tensor::new(vec![n, stencil.cells(), cout], y)?;
    let st = Arc::clone(stencil);
    Ok(tape.push(
        &[x, kernel],
        value,
        Box::new(move |g, p, _, need| {
            let gx = need[0].then(|| {
                let mut dcols = vec![0.0; m * cin * t];
                gemm_nn(g, p[1].data(), &mut dcols, m, cout, cin * t);
                st.col2im(&dcols, n, cin)
            });
            let gk = need[1].then(|| {
                let cols = st.im2col(p[0].data(), n, cin);
                let mut dk = vec![0.0; cout * cin * t];
                gemm_tn(g, &cols, &mut dk, m, cout, cin * t);
                dk
            });
            vec![gx, gk]
        }),
    ))
}

/// Exact adjoint of [`stencil_conv`] with respect to its input; kernel
/// shape `(cin, cout, taps)`.
pub fn stencil_conv_transpose(tape: &mut Tape, x: Var, kernel: Var, stencil: &Arc<Stencil>) -> Result<Var> {
    let ks = tape.shape(kernel).to_vec();
    if ks.len() != 3 || ks[2] != stencil.taps() {
        return Err(Error::dim(format!("kernel {ks:?} for a {}-tap stencil", stencil.taps())));
    }
    let (cin, cout, t) = (ks[0], ks[1], ks[2]);
    let n = check_input(tape, x, stencil.cells(), cin, "conv transpose")?;
    let m = n * stencil.cells();
    let mut cols = vec![0.0; m * cout * t];
    gemm_nn(tape.value(x).data(), tape.value(kernel).data(), &mut cols, m, cin, cout * t);
    let y = stencil.col2im(&cols, n, cout);
    let value = Tensor::new(vec![n, stencil.cells(), cout], y)?;
    let st = Arc::clone(stencil);
    Ok(tape.push(
        &[x, kernel],
        value,
        Box::new(move |g, p, _, need| {
            let dcols = st.im2col(g, n, cout);
            let gx = need[0].then(|| {
                let mut gx = vec![0.0; m * cin];
                gemm_nt(&dcols, p[1].data(), &mut gx, m, cin, cout * t);
                gx
            });
            let gk = need[1].then(|| {
                let mut dk = vec![0.0; cin * cout * t];
                gemm_tn(p[0].data(), &dcols, &mut dk, m, cin, cout * t);
                dk
            });
            vec![gx, gk]
        }),
    ))
}

/// Convolution layer over a fixed stencil, parameters `<name>/kernel` and
/// `<name>/bias`.
#[derive(Debug, Clone)]
pub struct Conv {
    pub name: String,
    pub in_channels: usize,
    pub out_channels: usize,
    pub transpose: bool,
    pub stencil: Arc<Stencil>,
}

impl Conv {
    pub fn new(name: &str, in_channels: usize, out_channels: usize, stencil: Arc<Stencil>) -> Self {
        Conv {
            name: name.to_string(),
            in_channels,
            out_channels,
            transpose: false,
            stencil,
        }
    }

    pub fn transposed(name: &str, in_channels: usize, out_channels: usize, stencil: Arc<Stencil>) -> Self {
        Conv {
            transpose: true,
            ..Conv::new(name, in_channels, out_channels, stencil)
        }
    }

    pub fn kernel_shape(&self) -> [usize; 3] {
        let t = self.stencil.taps();
        if self.transpose {
            [self.in_channels, self.out_channels, t]
        } else {
            [self.out_channels, self.in_channels, t]
        }
    }

    /// `taps * in * out + out`.
    pub fn param_count(&self) -> usize {
        self.stencil.taps() * self.in_channels * self.out_channels + self.out_channels
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        let t = self.stencil.taps();
        let kernel = glorot_init_with(t * self.in_channels, t * self.out_channels, &self.kernel_shape(), rng)?;
        store.insert(&format!("{}/kernel", self.name), kernel, true)?;
        store.insert(&format!("{}/bias", self.name), Tensor::zeros(&[self.out_channels]), true)
    }

    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var) -> Result<Var> {
        let k = tape.param(store, &format!("{}/kernel", self.name))?;
        let b = tape.param(store, &format!("{}/bias", self.name))?;
        let y = if self.transpose {
            stencil_conv_transpose(tape, x, k, &self.stencil)?
        } else {
            stencil_conv(tape, x, k, &self.stencil)?
        };
        tape.add_bias(y, b)
    }
}
