use crate::tensor::{ParamStore, Tape, Tensor, Var};
use crate::{Error, Result};

pub const BN_MOMENTUM: f64 = 0.99;
pub const BN_EPSILON: f64 = 1e-3;

/// Per-channel normalization over every axis but the last, with learned
/// `gamma`/`beta` and running statistics `<name>/moving_mean`,
/// `<name>/moving_var`.
#[derive(Debug, Clone)]
pub struct BatchNorm {
    pub name: String,
    pub channels: usize,
    pub momentum: f64,
    pub epsilon: f64,
}

impl BatchNorm {
    pub fn new(name: &str, channels: usize) -> Self {
        BatchNorm {
            name: name.to_string(),
            channels,
            momentum: BN_MOMENTUM,
            epsilon: BN_EPSILON,
        }
    }

    pub fn param_count(&self) -> usize {
        2 * self.channels
    }

    fn key(&self, what: &str) -> String {
        format!("{}/{what}", self.name)
    }

    pub fn init(&self, store: &mut ParamStore) -> Result<()> {
        let c = [self.channels];
        store.insert(&self.key("gamma"), Tensor::ones(&c), true)?;
        store.insert(&self.key("beta"), Tensor::zeros(&c), true)?;
        store.insert(&self.key("moving_mean"), Tensor::zeros(&c), false)?;
        store.insert(&self.key("moving_var"), Tensor::ones(&c), false)
    }

    /// Training mode normalizes with batch statistics (biased variance) and
    /// folds them into the running averages; evaluation mode uses the
    /// running averages.
    pub fn forward(&self, tape: &mut Tape, store: &mut ParamStore, x: Var, train: bool) -> Result<Var> {
        let c = self.channels;
        if tape.shape(x).last() != Some(&c) {
            return Err(Error::dim(format!("batch norm over {c} channels, input {:?}", tape.shape(x))));
        }
        let gamma = tape.param(store, &self.key("gamma"))?;
        let beta = tape.param(store, &self.key("beta"))?;
        if train {
            let (y, mean, var) = batch_norm_train(tape, x, gamma, beta, self.epsilon)?;
            let m = self.momentum;
            for (key, batch) in [("moving_mean", mean), ("moving_var", var)] {
                let run = store.value_mut(&self.key(key))?;
                run.data_mut()
                    .iter_mut()
                    .zip(batch)
                    .for_each(|(r, b)| *r = m * *r + (1.0 - m) * b);
            }
            Ok(y)
        } else {
            let mean = store.value(&self.key("moving_mean"))?.data().to_vec();
            let var = store.value(&self.key("moving_var"))?.data().to_vec();
            batch_norm_eval(tape, x, gamma, beta, &mean, &var, self.epsilon)
        }
    }
}

fn channel_stats(x: &[f64], c: usize) -> (Vec<f64>, Vec<f64>) {
    let rows = (x.len() / c) as f64;
    let mut mean = vec![0.0; c];
    for row in x.chunks(c) {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= rows);
    let mut var = vec![0.0; c];
    for row in x.chunks(c) {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= rows);
    (mean, var)
}

/// Returns the output with the batch mean and biased variance.
pub fn batch_norm_train(
    tape: &mut Tape,
    x: Var,
    gamma: Var,
    beta: Var,
    eps: f64,
) -> Result<(Var, Vec<f64>, Vec<f64>)> {
    let c = *tape.shape(x).last().unwrap();
    let xd = tape.value(x).data();
    let (mean, var) = channel_stats(xd, c);
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
    let xhat: Vec<f64> = xd
        .chunks(c)
        .flat_map(|row| (0..c).map(|j| (row[j] - mean[j]) * inv_std[j]).collect::<Vec<_>>())
        .collect();
    let (g, b) = (tape.value(gamma).data(), tape.value(beta).data());
    let y: Vec<f64> = xhat
        .chunks(c)
        .flat_map(|row| (0..c).map(|j| g[j] * row[j] + b[j]).collect::<Vec<_>>())
        .collect();
    let value = Tensor::new(tape.shape(x).to_vec(), y)?;
    let rows = xhat.len() / c;
    let out = tape.push(
        &[x, gamma, beta],
        value,
        Box::new(move |dy, p, _, need| {
            let gm = p[1].data();
            let mut sum_dy = vec![0.0; c];
            let mut sum_dy_xhat = vec![0.0; c];
            for (drow, xrow) in dy.chunks(c).zip(xhat.chunks(c)) {
                for j in 0..c {
                    sum_dy[j] += drow[j];
                    sum_dy_xhat[j] += drow[j] * xrow[j];
                }
            }
            let gx = need[0].then(|| {
                let m = rows as f64;
                dy.chunks(c)
                    .zip(xhat.chunks(c))
                    .flat_map(|(drow, xrow)| {
                        (0..c)
                            .map(|j| {
                                gm[j] * inv_std[j] / m * (m * drow[j] - sum_dy[j] - xrow[j] * sum_dy_xhat[j])
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect()
            });
            vec![gx, need[1].then_some(sum_dy_xhat), need[2].then_some(sum_dy)]
        }),
    );
    Ok((out, mean, var))
}

/// Affine normalization with fixed statistics.
pub fn batch_norm_eval(
    tape: &mut Tape,
    x: Var,
    gamma: Var,
    beta: Var,
    mean: &[f64],
    var: &[f64],
    eps: f64,
) -> Result<Var> {
    let c = mean.len();
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
    let mean = mean.to_vec();
    let (g, b) = (tape.value(gamma).data(), tape.value(beta).data());
    let y: Vec<f64> = tape
        .value(x)
        .data()
        .chunks(c)
        .flat_map(|row| (0..c).map(|j| g[j] * (row[j] - mean[j]) * inv_std[j] + b[j]).collect::<Vec<_>>())
        .collect();
    let value = Tensor::new(tape.shape(x).to_vec(), y)?;
    Ok(tape.push(
        &[x, gamma, beta],
        value,
        Box::new(move |dy, p, _, need| {
            let gm = p[1].data();
            let mut dg = vec![0.0; c];
            let mut db = vec![0.0; c];
            for (drow, xrow) in dy.chunks(c).zip(p[0].data().chunks(c)) {
                for j in 0..c {
                    dg[j] += drow[j] * (xrow[j] - mean[j]) * inv_std[j];
                    db[j] += drow[j];
                }
            }
            let gx = need[0].then(|| {
                dy.chunks(c)
                    .flat_map(|row| (0..c).map(|j| row[j] * gm[j] * inv_std[j]).collect::<Vec<_>>())
                    .collect()
            });
            vec![gx, need[1].then_some(dg), need[2].then_some(db)]
        }),
    ))
}
