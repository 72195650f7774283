//! Auxiliary-classifier GAN on either lattice. The generator maps noise
//! plus a learned class embedding to a seed grid and upsamples by
//! replication; the discriminator predicts real/fake and the class.

use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use super::levels::{hex_levels, square_levels};
use super::{epoch_order, to_image, EpochLog, Family, LatticeImage, Lattice, ModelConfig, OutputShape, TrainOptions};
use crate::layers::{max_pool, unpool_replicate, BatchNorm, Conv, Dense, Grouping, Stencil};
use crate::metrics::{pooled_report, square_report, transformation_report, MetricReport};
use crate::resample::{compute_overlap_map, square_to_hex_area, OverlapMap, SquareImage};
use crate::tensor::{glorot_init_with, seeded_rng, Adam, AdamConfig, Checkpoint, NamedTensor, ParamStore, Rng, Tape, Tensor, Var};
use crate::{Error, Result};

pub const LEAKY_SLOPE: f64 = 0.2;

/// Per-level stencil and pooling onto the next coarser level.
type Level = (Arc<Stencil>, Arc<Grouping>, usize);

fn lattice_levels(config: &ModelConfig, count: usize) -> Result<Vec<Level>> {
    let [h, w, _] = config.input_shape;
    Ok(match config.lattice {
        Lattice::Square => square_levels(h, w, count)
            .into_iter()
            .map(|l| {
                let cells = l.cells();
                (l.stencil, l.pool, cells)
            })
            .collect(),
        Lattice::Hex => hex_levels(h, w, count)?
            .into_iter()
            .map(|l| (l.stencil, Arc::clone(&l.pool.grouping), l.geometry.len()))
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub params: ParamStore,
    classes: usize,
    embedding_dim: usize,
    dense: Dense,
    seed_cells: usize,
    width: usize,
    stages: Vec<(Arc<Grouping>, Conv, BatchNorm)>,
    final_conv: Conv,
}

impl Generator {
    fn new(config: &ModelConfig, levels: &[Level], rng: &mut Rng) -> Result<Self> {
        let s = config.generator_stages;
        let seed_cells = levels[s].2;
        let c0 = config.generator_width;
        let dense = Dense::new("generator/dense", config.latent_dim + config.embedding_dim, seed_cells * c0);
        let mut stages = Vec::new();
        let mut width = c0;
        for (j, k) in (0..s).rev().enumerate() {
            let (stencil, pool, _) = &levels[k];
            let conv = Conv::transposed(&format!("generator/deconv{}", j + 1), width, width / 2, Arc::clone(stencil));
            let bn = BatchNorm::new(&format!("generator/bn{}", j + 1), width / 2);
            stages.push((Arc::clone(pool), conv, bn));
            width /= 2;
        }
        let final_conv = Conv::new("generator/conv_out", width, config.input_shape[2], Arc::clone(&levels[0].0));

        let mut params = ParamStore::new();
        let (k, e) = (config.class_count, config.embedding_dim);
        params.insert("generator/embedding", glorot_init_with(k, e, &[k, e], rng)?, true)?;
        dense.init(&mut params, rng)?;
        for (_, conv, bn) in &stages {
            conv.init(&mut params, rng)?;
            bn.init(&mut params)?;
        }
        final_conv.init(&mut params, rng)?;
        Ok(Generator {
            params,
            classes: k,
            embedding_dim: e,
            dense,
            seed_cells,
            width: c0,
            stages,
            final_conv,
        })
    }

    /// Width of the dense layer output.
    pub fn dense_width(&self) -> usize {
        self.dense.out_features
    }

    pub fn conv_layers(&self) -> Vec<&Conv> {
        self.stages
            .iter()
            .map(|(_, c, _)| c)
            .chain(std::iter::once(&self.final_conv))
            .collect()
    }

    /// `z: [n, latent]`; output `[n, cells, channels]` in `(-1, 1)`.
    pub fn forward(&mut self, tape: &mut Tape, z: Var, labels: &[usize], train: bool) -> Result<Var> {
        let n = labels.len();
        let mut onehot = vec![0.0; n * self.classes];
        for (i, &l) in labels.iter().enumerate() {
            if l >= self.classes {
                return Err(Error::Label {
                    label: l,
                    class_count: self.classes,
                });
            }
            onehot[i * self.classes + l] = 1.0;
        }
        let onehot = tape.constant(Tensor::new(vec![n, self.classes], onehot)?);
        let table = tape.param(&self.params, "generator/embedding")?;
        let emb = tape.matmul(onehot, table)?;
        debug_assert_eq!(tape.shape(emb), [n, self.embedding_dim]);
        let input = tape.concat(&[z, emb], 1)?;
        let d = self.dense.forward(tape, &self.params, input)?;
        let mut h = tape.reshape(d, &[n, self.seed_cells, self.width])?;
        for (pool, conv, bn) in &self.stages {
            let u = unpool_replicate(tape, h, pool)?;
            let y = conv.forward(tape, &self.params, u)?;
            let y = bn.forward(tape, &mut self.params, y, train)?;
            h = tape.relu(y);
        }
        let y = self.final_conv.forward(tape, &self.params, h)?;
        Ok(tape.tanh(y))
    }
}

#[derive(Debug, Clone)]
pub struct Discriminator {
    pub params: ParamStore,
    stages: Vec<(Conv, Arc<Grouping>)>,
    features: usize,
    real_head: Dense,
    class_head: Dense,
}

pub struct DiscriminatorOutput {
    /// `[n, 1]` real/fake logits.
    pub real_logits: Var,
    /// `[n, classes]` class logits.
    pub class_logits: Var,
}

impl Discriminator {
    fn new(config: &ModelConfig, levels: &[Level], rng: &mut Rng) -> Result<Self> {
        let widths: Vec<usize> = std::iter::once(config.input_shape[2])
            .chain(config.channel_schedule.iter().copied())
            .collect();
        let stages: Vec<(Conv, Arc<Grouping>)> = (0..config.channel_schedule.len())
            .map(|k| {
                let (stencil, pool, _) = &levels[k];
                let conv = Conv::new(&format!("discriminator/conv{}", k + 1), widths[k], widths[k + 1], Arc::clone(stencil));
                (conv, Arc::clone(pool))
            })
            .collect();
        let features = levels[stages.len()].2 * widths[stages.len()];
        let real_head = Dense::new("discriminator/real", features, 1);
        let class_head = Dense::new("discriminator/class", features, config.class_count);
        let mut params = ParamStore::new();
        for (conv, _) in &stages {
            conv.init(&mut params, rng)?;
        }
        real_head.init(&mut params, rng)?;
        class_head.init(&mut params, rng)?;
        Ok(Discriminator {
            params,
            stages,
            features,
            real_head,
            class_head,
        })
    }

    pub fn conv_layers(&self) -> Vec<&Conv> {
        self.stages.iter().map(|(c, _)| c).collect()
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<DiscriminatorOutput> {
        let n = tape.shape(x)[0];
        let mut h = x;
        for (conv, pool) in &self.stages {
            let y = conv.forward(tape, &self.params, h)?;
            let y = tape.leaky_relu(y, LEAKY_SLOPE);
            h = max_pool(tape, y, pool)?.0;
        }
        let flat = tape.reshape(h, &[n, self.features])?;
        Ok(DiscriminatorOutput {
            real_logits: self.real_head.forward(tape, &self.params, flat)?,
            class_logits: self.class_head.forward(tape, &self.params, flat)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Acgan {
    pub config: ModelConfig,
    pub generator: Generator,
    pub discriminator: Discriminator,
    output: OutputShape,
    overlap: Option<Arc<OverlapMap>>,
}

impl Acgan {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        if config.family != Family::Acgan {
            return Err(Error::Config(format!("{} config given to the GAN", config.family)));
        }
        let depth = config.generator_stages.max(config.channel_schedule.len());
        let levels = lattice_levels(&config, depth)?;
        let mut rng = seeded_rng(config.seed, "init");
        let generator = Generator::new(&config, &levels, &mut rng)?;
        let discriminator = Discriminator::new(&config, &levels, &mut rng)?;
        let [h, w, c] = config.input_shape;
        let (output, overlap) = match config.lattice {
            Lattice::Square => (
                OutputShape::Square {
                    height: h,
                    width: w,
                    channels: c,
                },
                None,
            ),
            Lattice::Hex => {
                let geometry = hex_levels(h, w, 0)?[0].geometry;
                (
                    OutputShape::Hex { geometry, channels: c },
                    Some(Arc::new(compute_overlap_map(&geometry, h, w))),
                )
            }
        };
        Ok(Acgan {
            config,
            generator,
            discriminator,
            output,
            overlap,
        })
    }

    pub fn output_shape(&self) -> OutputShape {
        self.output
    }

    pub fn trainable_params(&self) -> (usize, usize) {
        (
            self.generator.params.trainable_count(),
            self.discriminator.params.trainable_count(),
        )
    }

    pub fn optimizers(&self, config: AdamConfig) -> Result<(Adam, Adam)> {
        Ok((
            Adam::new(config, &self.generator.params)?,
            Adam::new(config, &self.discriminator.params)?,
        ))
    }

    /// Real images on the model lattice, scaled to `[-1, 1]`.
    pub fn prepare_real(&self, images: &[SquareImage]) -> Result<Vec<Vec<f64>>> {
        let [h, w, c] = self.config.input_shape;
        images
            .iter()
            .map(|img| {
                if (img.height, img.width, img.channels) != (h, w, c) {
                    return Err(Error::dim(format!(
                        "image {}x{}x{} for a {h}x{w}x{c} model",
                        img.height, img.width, img.channels
                    )));
                }
                let data = match &self.overlap {
                    Some(map) => square_to_hex_area(img, map)?.data,
                    None => img.data.clone(),
                };
                Ok(data.iter().map(|&v| 2.0 * v as f64 - 1.0).collect())
            })
            .collect()
    }

    fn batch_var(&self, tape: &mut Tape, samples: &[&[f64]]) -> Result<Var> {
        let (cells, c) = (self.output.cells(), self.output.channels());
        let data: Vec<f64> = samples.iter().flat_map(|s| s.iter().copied()).collect();
        Ok(tape.constant(Tensor::new(vec![samples.len(), cells, c], data)?))
    }

    fn noise(&self, rng: &mut Rng, n: usize) -> Tensor {
        let d = self.config.latent_dim;
        let data = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
        Tensor::new(vec![n, d], data).expect("noise shape")
    }

    fn random_labels(&self, rng: &mut Rng, n: usize) -> Vec<usize> {
        use rand::Rng as _;
        (0..n).map(|_| rng.random_range(0..self.config.class_count)).collect()
    }

    /// Generator output values `[n * cells * channels]` in `(-1, 1)`.
    pub fn generate_values(&mut self, labels: &[usize], rng: &mut Rng, train: bool) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let z = tape.constant(self.noise(rng, labels.len()));
        let y = self.generator.forward(&mut tape, z, labels, train)?;
        Ok(tape.value(y).data().to_vec())
    }

    /// Evaluation-mode samples mapped to `[0, 1]`.
    pub fn generate(&mut self, labels: &[usize], seed: u64) -> Result<Vec<LatticeImage>> {
        let mut rng = seeded_rng(seed, "generate");
        let values = self.generate_values(labels, &mut rng, false)?;
        let per = self.output.cells() * self.output.channels();
        values
            .chunks(per)
            .map(|s| to_image(&s.iter().map(|v| 0.5 * (v + 1.0)).collect::<Vec<_>>(), self.output))
            .collect()
    }

    /// One discriminator update followed by one generator update.
    /// Returns `(discriminator loss, generator loss)`.
    pub fn train_step(
        &mut self,
        real: &[&[f64]],
        labels: &[usize],
        adams: (&mut Adam, &mut Adam),
        rng: &mut Rng,
    ) -> Result<(f64, f64)> {
        let (adam_g, adam_d) = adams;
        let n = real.len();
        if let Some(&l) = labels.iter().find(|&&l| l >= self.config.class_count) {
            return Err(Error::Label {
                label: l,
                class_count: self.config.class_count,
            });
        }

        let fake_labels = self.random_labels(rng, n);
        let fake = self.generate_values(&fake_labels, rng, true)?;
        let per = self.output.cells() * self.output.channels();
        let fake_refs: Vec<&[f64]> = fake.chunks(per).collect();

        let mut tape = Tape::new();
        let xr = self.batch_var(&mut tape, real)?;
        let xf = self.batch_var(&mut tape, &fake_refs)?;
        let out_r = self.discriminator.forward(&mut tape, xr)?;
        let out_f = self.discriminator.forward(&mut tape, xf)?;
        let l1 = tape.bce_with_logits(out_r.real_logits, &vec![1.0; n])?;
        let l2 = tape.softmax_cross_entropy(out_r.class_logits, labels)?;
        let l3 = tape.bce_with_logits(out_f.real_logits, &vec![0.0; n])?;
        let l4 = tape.softmax_cross_entropy(out_f.class_logits, &fake_labels)?;
        let s1 = tape.add(l1, l2)?;
        let s2 = tape.add(l3, l4)?;
        let d_loss = tape.add(s1, s2)?;
        let grads = tape.backward(d_loss)?;
        self.discriminator.params.zero_grad();
        self.discriminator.params.accumulate(&tape, &grads);
        adam_d.step(&mut self.discriminator.params)?;
        let d_value = tape.value(d_loss).item();

        let gen_labels = self.random_labels(rng, n);
        let mut tape = Tape::new();
        let z = tape.constant(self.noise(rng, n));
        let y = self.generator.forward(&mut tape, z, &gen_labels, true)?;
        tape.set_params_frozen(true);
        let out = self.discriminator.forward(&mut tape, y)?;
        let g1 = tape.bce_with_logits(out.real_logits, &vec![1.0; n])?;
        let g2 = tape.softmax_cross_entropy(out.class_logits, &gen_labels)?;
        let g_loss = tape.add(g1, g2)?;
        let grads = tape.backward(g_loss)?;
        self.generator.params.zero_grad();
        self.generator.params.accumulate(&tape, &grads);
        adam_g.step(&mut self.generator.params)?;
        Ok((d_value, tape.value(g_loss).item()))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn train(
        &mut self,
        images: &[SquareImage],
        labels: &[usize],
        opts: &TrainOptions,
        adams: (&mut Adam, &mut Adam),
        start_epoch: usize,
        on_epoch: &mut dyn FnMut(&EpochLog, &Self, &Adam, &Adam) -> Result<()>,
    ) -> Result<Vec<EpochLog>> {
        if images.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if images.len() != labels.len() {
            return Err(Error::dim(format!("{} images, {} labels", images.len(), labels.len())));
        }
        if opts.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        let (adam_g, adam_d) = adams;
        let real = self.prepare_real(images)?;
        let mut logs = Vec::new();
        for epoch in start_epoch..opts.epochs {
            let order = epoch_order(images.len(), opts.seed, epoch);
            let (mut d_total, mut g_total, mut steps) = (0.0, 0.0, 0);
            for (step, chunk) in order.chunks(opts.batch_size).enumerate() {
                let batch: Vec<&[f64]> = chunk.iter().map(|&i| real[i].as_slice()).collect();
                let y: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
                let mut rng = seeded_rng(opts.seed, &format!("noise/{epoch}/{step}"));
                let (d, g) = self.train_step(&batch, &y, (&mut *adam_g, &mut *adam_d), &mut rng)?;
                d_total += d * chunk.len() as f64;
                g_total += g * chunk.len() as f64;
                steps += 1;
            }
            let n = images.len() as f64;
            let log = EpochLog {
                epoch: epoch + 1,
                steps,
                loss: g_total / n,
                discriminator_loss: Some(d_total / n),
            };
            on_epoch(&log, self, adam_g, adam_d)?;
            logs.push(log);
        }
        Ok(logs)
    }

    /// Real/fake accuracy of the discriminator on `real` images and as many
    /// fresh generator samples (batch-statistics normalization when
    /// `train_bn`).
    pub fn discriminator_accuracy(&mut self, real: &[SquareImage], labels: &[usize], seed: u64, train_bn: bool) -> Result<f64> {
        if real.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let prepared = self.prepare_real(real)?;
        let mut rng = seeded_rng(seed, "accuracy");
        let fake = self.generate_values(labels, &mut rng, train_bn)?;
        let per = self.output.cells() * self.output.channels();
        let mut tape = Tape::new();
        let refs: Vec<&[f64]> = prepared.iter().map(Vec::as_slice).collect();
        let xr = self.batch_var(&mut tape, &refs)?;
        let fake_refs: Vec<&[f64]> = fake.chunks(per).collect();
        let xf = self.batch_var(&mut tape, &fake_refs)?;
        let out_r = self.discriminator.forward(&mut tape, xr)?;
        let out_f = self.discriminator.forward(&mut tape, xf)?;
        let hits = tape.value(out_r.real_logits).data().iter().filter(|&&l| l > 0.0).count()
            + tape.value(out_f.real_logits).data().iter().filter(|&&l| l < 0.0).count();
        Ok(hits as f64 / (2 * real.len()) as f64)
    }

    /// Class probabilities of the discriminator for `images`.
    pub fn classify(&self, images: &[SquareImage]) -> Result<Vec<Vec<f64>>> {
        let prepared = self.prepare_real(images)?;
        let mut tape = Tape::new();
        let refs: Vec<&[f64]> = prepared.iter().map(Vec::as_slice).collect();
        let x = self.batch_var(&mut tape, &refs)?;
        let out = self.discriminator.forward(&mut tape, x)?;
        let p = tape.softmax(out.class_logits);
        Ok(tape
            .value(p)
            .data()
            .chunks(self.config.class_count)
            .map(<[f64]>::to_vec)
            .collect())
    }

    /// Generation quality: generated sample `i` of class `k` against the
    /// `i`-th image of class `k` among `originals`, in order. One sample
    /// is generated per original.
    pub fn evaluate(&mut self, originals: &[SquareImage], labels: &[usize], seed: u64) -> Result<MetricReport> {
        if originals.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let generated = self.generate(labels, seed)?;
        let reports = originals
            .iter()
            .zip(&generated)
            .map(|(s, g)| match (g, &self.overlap) {
                (LatticeImage::Square(g), _) => square_report(s, g),
                (LatticeImage::Hex(g), Some(map)) => transformation_report(s, g, map),
                (LatticeImage::Hex(_), None) => unreachable!("hex output without overlap map"),
            })
            .collect::<Result<Vec<_>>>()?;
        pooled_report(&reports)
    }

    pub fn to_checkpoint(&self, adams: Option<(&Adam, &Adam)>, epochs_done: usize) -> Checkpoint {
        let mut ckpt = Checkpoint::new();
        self.generator.params.to_checkpoint("", &mut ckpt);
        self.discriminator.params.to_checkpoint("", &mut ckpt);
        if let Some((g, d)) = adams {
            g.to_checkpoint("generator", &mut ckpt);
            d.to_checkpoint("discriminator", &mut ckpt);
        }
        ckpt.push(NamedTensor::new("meta/epoch", vec![1], vec![epochs_done as f32]));
        ckpt
    }

    pub fn load_checkpoint(&mut self, ckpt: &Checkpoint, adams: Option<(&mut Adam, &mut Adam)>) -> Result<usize> {
        self.generator.params.load_checkpoint("", ckpt)?;
        self.discriminator.params.load_checkpoint("", ckpt)?;
        if let Some((g, d)) = adams {
            g.load_checkpoint("generator", ckpt)?;
            d.load_checkpoint("discriminator", ckpt)?;
        }
        Ok(ckpt.get("meta/epoch").and_then(|t| t.data.first()).map_or(0, |&e| e as usize))
    }
}
