//! What-where autoencoder: square conv/pool encoder down to a `1 x 1` core,
//! decoder unpooling with the encoder's argmax switches on either lattice.

use std::sync::Arc;

use super::levels::{hex_levels, square_levels, HexLevel, SquareLevel};
use super::{epoch_order, stack, to_image, EpochLog, Family, LatticeImage, Lattice, ModelConfig, OutputShape, TrainOptions};
use crate::layers::{max_pool, unpool_where, BatchNorm, Conv, WhereMask};
use crate::metrics::{pooled_report, square_report, transformation_report, MetricReport};
use crate::resample::{compute_overlap_map, OverlapMap, SquareImage};
use crate::tensor::{seeded_rng, Adam, AdamConfig, Checkpoint, NamedTensor, ParamStore, Tape, Tensor, Var};
use crate::{Error, Result};

const SQUARE_CHAIN_32: [(usize, usize); 6] = [(32, 32), (16, 16), (8, 8), (4, 4), (2, 2), (1, 1)];
const HEX_CHAIN_32: [(usize, usize); 6] = [(34, 30), (17, 15), (9, 8), (5, 4), (3, 2), (2, 1)];

/// Where-switch transfer from square level `k` onto hex pooling `k`.
#[derive(Debug, Clone)]
struct Translation {
    /// Coarse square cell nearest to each coarse hex cell.
    square_parent: Vec<u32>,
    /// Per coarse hex cell: `(fine square cell, chosen fine hex cell)`.
    choices: Vec<Vec<(u32, u32)>>,
}

impl Translation {
    fn new(fine_sq: &SquareLevel, coarse_sq: &SquareLevel, hex: &HexLevel) -> Self {
        let grouping = &hex.pool.grouping;
        let coarse_centers = hex.pool.output.centers();
        let fine_centers = hex.geometry.centers();
        let mut square_parent = Vec::with_capacity(grouping.out_cells());
        let mut choices = Vec::with_capacity(grouping.out_cells());
        for (o, &(x, y)) in coarse_centers.iter().enumerate() {
            let q = coarse_sq.cell_at(x, y);
            square_parent.push(q as u32);
            let members = grouping.group(o);
            let picks = fine_sq
                .pool
                .group(q)
                .iter()
                .map(|&p| {
                    let (px, py) = fine_sq.center(p as usize);
                    let best = members
                        .iter()
                        .copied()
                        .min_by(|&a, &b| {
                            let d = |i: u32| {
                                let (hx, hy) = fine_centers[i as usize];
                                (hx - px).powi(2) + (hy - py).powi(2)
                            };
                            d(a).total_cmp(&d(b)).then(a.cmp(&b))
                        })
                        .expect("groups are non-empty");
                    (p, best)
                })
                .collect();
            choices.push(picks);
        }
        Translation { square_parent, choices }
    }

    fn apply(&self, mask: &WhereMask, hex: &HexLevel) -> Result<WhereMask> {
        let (n, c) = (mask.batch, mask.channels);
        let p_out = self.square_parent.len();
        let mut argmax = Vec::with_capacity(n * p_out * c);
        for b in 0..n {
            for o in 0..p_out {
                let q = self.square_parent[o] as usize;
                for ch in 0..c {
                    let p = mask.at(b, q, ch) as u32;
                    let &(_, h) = self.choices[o]
                        .iter()
                        .find(|(sq, _)| *sq == p)
                        .ok_or_else(|| Error::Integrity(format!("square switch {p} outside window {q}")))?;
                    argmax.push(h);
                }
            }
        }
        Ok(WhereMask {
            grouping: Arc::clone(&hex.pool.grouping),
            batch: n,
            channels: c,
            argmax,
        })
    }
}

#[derive(Debug, Clone)]
struct HexDecoder {
    levels: Vec<HexLevel>,
    /// Square core cell feeding each cell of the coarsest hex level.
    bridge: Vec<usize>,
    translations: Vec<Translation>,
    overlap: Arc<OverlapMap>,
}

#[derive(Debug, Clone)]
pub struct Swwae {
    pub config: ModelConfig,
    pub params: ParamStore,
    square: Vec<SquareLevel>,
    hex: Option<HexDecoder>,
    enc_conv: Vec<Conv>,
    enc_bn: Vec<BatchNorm>,
    dec_conv: Vec<Conv>,
    dec_bn: Vec<Option<BatchNorm>>,
    output: OutputShape,
}

impl Swwae {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        if config.family != Family::Swwae {
            return Err(Error::Config(format!("{} config given to the autoencoder", config.family)));
        }
        let [h, w, c] = config.input_shape;
        let stages = config.channel_schedule.len();
        let square = square_levels(h, w, stages);
        let chain: Vec<(usize, usize)> = square.iter().map(|l| (l.rows, l.cols)).collect();
        if (h, w, stages) == (32, 32, 5) && chain != SQUARE_CHAIN_32 {
            return Err(Error::Integrity(format!("square stage chain {chain:?}")));
        }
        let core = square.last().unwrap();
        if core.cells() != 1 {
            return Err(Error::Config(format!(
                "{stages} stages reduce {h}x{w} to {}x{}, not 1x1",
                core.rows, core.cols
            )));
        }

        let widths: Vec<usize> = std::iter::once(c).chain(config.channel_schedule.iter().copied()).collect();
        let mut enc_conv = Vec::new();
        let mut enc_bn = Vec::new();
        for k in 0..stages {
            let name = format!("encoder/conv{}", k + 1);
            enc_conv.push(Conv::new(&name, widths[k], widths[k + 1], Arc::clone(&square[k].stencil)));
            enc_bn.push(BatchNorm::new(&format!("encoder/bn{}", k + 1), widths[k + 1]));
        }

        let hex = match config.lattice {
            Lattice::Square => None,
            Lattice::Hex => {
                let levels = hex_levels(h, w, stages)?;
                let hchain: Vec<(usize, usize)> = levels.iter().map(|l| l.geometry.shape()).collect();
                if (h, w, stages) == (32, 32, 5) && hchain != HEX_CHAIN_32 {
                    return Err(Error::Integrity(format!("hex stage chain {hchain:?}")));
                }
                let coarsest = &levels[stages].geometry;
                let bridge = coarsest
                    .centers()
                    .iter()
                    .map(|&(x, y)| core.cell_at(x, y))
                    .collect();
                let translations = (0..stages)
                    .map(|k| Translation::new(&square[k], &square[k + 1], &levels[k]))
                    .collect();
                let overlap = Arc::new(compute_overlap_map(&levels[0].geometry, h, w));
                Some(HexDecoder {
                    levels,
                    bridge,
                    translations,
                    overlap,
                })
            }
        };

        let mut dec_conv = Vec::new();
        let mut dec_bn = Vec::new();
        for k in 0..stages {
            let name = format!("decoder/deconv{}", k + 1);
            let stencil = match &hex {
                Some(d) => Arc::clone(&d.levels[k].stencil),
                None => Arc::clone(&square[k].stencil),
            };
            dec_conv.push(Conv::transposed(&name, widths[k + 1], widths[k], stencil));
            dec_bn.push((k > 0).then(|| BatchNorm::new(&format!("decoder/bn{}", k + 1), widths[k])));
        }

        let output = match &hex {
            Some(d) => OutputShape::Hex {
                geometry: d.levels[0].geometry,
                channels: c,
            },
            None => OutputShape::Square {
                height: h,
                width: w,
                channels: c,
            },
        };

        let mut params = ParamStore::new();
        let mut rng = seeded_rng(config.seed, "init");
        for (conv, bn) in enc_conv.iter().zip(&enc_bn) {
            conv.init(&mut params, &mut rng)?;
            bn.init(&mut params)?;
        }
        for (conv, bn) in dec_conv.iter().zip(&dec_bn).rev() {
            conv.init(&mut params, &mut rng)?;
            if let Some(bn) = bn {
                bn.init(&mut params)?;
            }
        }

        Ok(Swwae {
            config,
            params,
            square,
            hex,
            enc_conv,
            enc_bn,
            dec_conv,
            dec_bn,
            output,
        })
    }

    pub fn output_shape(&self) -> OutputShape {
        self.output
    }

    pub fn conv_layers(&self) -> Vec<&Conv> {
        self.enc_conv.iter().chain(&self.dec_conv).collect()
    }

    pub fn trainable_params(&self) -> usize {
        self.params.trainable_count()
    }

    pub fn optimizer(&self, config: AdamConfig) -> Result<Adam> {
        Adam::new(config, &self.params)
    }

    /// Shapes of every resolution level, finest first.
    pub fn stage_chain(&self) -> (Vec<(usize, usize)>, Option<Vec<(usize, usize)>>) {
        let sq = self.square.iter().map(|l| (l.rows, l.cols)).collect();
        let hx = self
            .hex
            .as_ref()
            .map(|d| d.levels.iter().map(|l| l.geometry.shape()).collect());
        (sq, hx)
    }

    fn input_var(&self, tape: &mut Tape, images: &[&SquareImage]) -> Result<Var> {
        let [h, w, c] = self.config.input_shape;
        if let Some(bad) = images.iter().find(|i| (i.height, i.width, i.channels) != (h, w, c)) {
            return Err(Error::dim(format!(
                "image {}x{}x{} for a {h}x{w}x{c} model",
                bad.height, bad.width, bad.channels
            )));
        }
        let data = stack(images.iter().map(|i| i.data.as_slice()), f64::from);
        Ok(tape.constant(Tensor::new(vec![images.len(), h * w, c], data)?))
    }

    /// Encoder and decoder; output `[batch, cells, channels]` in `(0, 1)`.
    pub fn forward(&mut self, tape: &mut Tape, x: Var, train: bool) -> Result<Var> {
        let stages = self.enc_conv.len();
        let mut h = x;
        let mut masks = Vec::with_capacity(stages);
        for k in 0..stages {
            h = self.enc_conv[k].forward(tape, &self.params, h)?;
            h = self.enc_bn[k].forward(tape, &mut self.params, h, train)?;
            h = tape.relu(h);
            let (p, m) = max_pool(tape, h, &self.square[k].pool)?;
            h = p;
            masks.push(m);
        }
        let n = tape.shape(x)[0];
        if let Some(dec) = &self.hex {
            let c = *tape.shape(h).last().unwrap();
            let core_cells = self.square[stages].cells();
            let idx: Vec<usize> = (0..n)
                .flat_map(|b| dec.bridge.iter().map(move |&s| (b, s)))
                .flat_map(|(b, s)| (0..c).map(move |ch| (b * core_cells + s) * c + ch))
                .collect();
            let flat = tape.reshape(h, &[n * core_cells * c])?;
            let g = tape.gather(flat, Arc::new(idx))?;
            h = tape.reshape(g, &[n, dec.bridge.len(), c])?;
        }
        for k in (0..stages).rev() {
            let u = match &self.hex {
                Some(dec) => {
                    let mask = dec.translations[k].apply(&masks[k], &dec.levels[k])?;
                    unpool_where(tape, h, &mask)?
                }
                None => unpool_where(tape, h, &masks[k])?,
            };
            let y = self.dec_conv[k].forward(tape, &self.params, u)?;
            h = match &self.dec_bn[k] {
                Some(bn) => {
                    let y = bn.forward(tape, &mut self.params, y, train)?;
                    let y = tape.relu(y);
                    if self.config.residual && tape.shape(y) == tape.shape(u) {
                        tape.add(y, u)?
                    } else {
                        y
                    }
                }
                None => tape.sigmoid(y),
            };
        }
        Ok(h)
    }

    /// Reconstruction loss of a batch: the area-weighted transformation MSE
    /// against the square inputs (plain MSE on the square lattice),
    /// averaged over the batch.
    pub fn loss(&mut self, tape: &mut Tape, images: &[&SquareImage], train: bool) -> Result<Var> {
        let x = self.input_var(tape, images)?;
        let y = self.forward(tape, x, train)?;
        let n = images.len();
        let c = self.output.channels();
        match &self.hex {
            None => {
                let w = 1.0 / tape.value(y).len() as f64;
                let weights = Arc::new(vec![w; tape.value(y).len()]);
                tape.weighted_sse(y, x, weights)
            }
            Some(dec) => {
                let map = &dec.overlap;
                let cells = self.output.cells();
                let scale = 1.0 / (map.total_area * c as f64 * n as f64);
                let per = map.entries.len() * c;
                let mut idx = Vec::with_capacity(n * per);
                let mut target = Vec::with_capacity(n * per);
                let mut weights = Vec::with_capacity(n * per);
                for (b, img) in images.iter().enumerate() {
                    for e in &map.entries {
                        let (hx, px) = (map.hex_index(e), map.pixel_index(e));
                        for ch in 0..c {
                            idx.push((b * cells + hx) * c + ch);
                            target.push(img.pixel(px)[ch] as f64);
                            weights.push(e.area * scale);
                        }
                    }
                }
                let flat = tape.reshape(y, &[n * cells * c])?;
                let picked = tape.gather(flat, Arc::new(idx))?;
                let t = tape.constant(Tensor::new(vec![target.len()], target)?);
                tape.weighted_sse(picked, t, Arc::new(weights))
            }
        }
    }

    /// One optimizer step on a batch; returns the batch loss.
    pub fn train_step(&mut self, images: &[&SquareImage], adam: &mut Adam) -> Result<f64> {
        let mut tape = Tape::new();
        let loss = self.loss(&mut tape, images, true)?;
        let grads = tape.backward(loss)?;
        self.params.zero_grad();
        self.params.accumulate(&tape, &grads);
        adam.step(&mut self.params)?;
        Ok(tape.value(loss).item())
    }

    /// Epochs `start_epoch..opts.epochs`; `on_epoch` sees each log as it
    /// completes.
    pub fn train(
        &mut self,
        images: &[SquareImage],
        opts: &TrainOptions,
        adam: &mut Adam,
        start_epoch: usize,
        on_epoch: &mut dyn FnMut(&EpochLog, &Self, &Adam) -> Result<()>,
    ) -> Result<Vec<EpochLog>> {
        if images.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if opts.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        let mut logs = Vec::new();
        for epoch in start_epoch..opts.epochs {
            let order = epoch_order(images.len(), opts.seed, epoch);
            let (mut total, mut steps) = (0.0, 0);
            for chunk in order.chunks(opts.batch_size) {
                let batch: Vec<&SquareImage> = chunk.iter().map(|&i| &images[i]).collect();
                total += self.train_step(&batch, adam)? * batch.len() as f64;
                steps += 1;
            }
            let log = EpochLog {
                epoch: epoch + 1,
                steps,
                loss: total / images.len() as f64,
                discriminator_loss: None,
            };
            on_epoch(&log, self, adam)?;
            logs.push(log);
        }
        Ok(logs)
    }

    /// Evaluation-mode outputs.
    pub fn reconstruct(&mut self, images: &[SquareImage], batch_size: usize) -> Result<Vec<LatticeImage>> {
        let mut out = Vec::with_capacity(images.len());
        let per = self.output.cells() * self.output.channels();
        for chunk in images.chunks(batch_size.max(1)) {
            let mut tape = Tape::new();
            let refs: Vec<&SquareImage> = chunk.iter().collect();
            let x = self.input_var(&mut tape, &refs)?;
            let y = self.forward(&mut tape, x, false)?;
            for sample in tape.value(y).data().chunks(per) {
                out.push(to_image(sample, self.output)?);
            }
        }
        Ok(out)
    }

    /// Reconstruction quality against the inputs, pooled over images.
    pub fn evaluate(&mut self, images: &[SquareImage], batch_size: usize) -> Result<MetricReport> {
        if images.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let recon = self.reconstruct(images, batch_size)?;
        let reports = images
            .iter()
            .zip(&recon)
            .map(|(s, r)| match (r, &self.hex) {
                (LatticeImage::Square(r), _) => square_report(s, r),
                (LatticeImage::Hex(r), Some(dec)) => transformation_report(s, r, &dec.overlap),
                (LatticeImage::Hex(_), None) => unreachable!("hex output without hex decoder"),
            })
            .collect::<Result<Vec<_>>>()?;
        pooled_report(&reports)
    }

    pub fn to_checkpoint(&self, adam: Option<&Adam>, epochs_done: usize) -> Checkpoint {
        let mut ckpt = Checkpoint::new();
        self.params.to_checkpoint("", &mut ckpt);
        if let Some(adam) = adam {
            adam.to_checkpoint("", &mut ckpt);
        }
        ckpt.push(NamedTensor::new("meta/epoch", vec![1], vec![epochs_done as f32]));
        ckpt
    }

    /// Restores parameters (and optimizer state when given); returns the
    /// number of completed epochs.
    pub fn load_checkpoint(&mut self, ckpt: &Checkpoint, adam: Option<&mut Adam>) -> Result<usize> {
        self.params.load_checkpoint("", ckpt)?;
        if let Some(adam) = adam {
            adam.load_checkpoint("", ckpt)?;
        }
        Ok(ckpt.get("meta/epoch").and_then(|t| t.data.first()).map_or(0, |&e| e as usize))
    }
}
