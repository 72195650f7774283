//! Differentiable primitives recorded on a [`Tape`].

use std::sync::Arc;

use super::linalg::{gemm_nn, gemm_nt, gemm_tn};
use super::{Tape, Tensor, Var};
use crate::metrics::pairwise_sum;
use crate::{Error, Result};

fn same_shape(tape: &Tape, a: Var, b: Var, op: &str) -> Result<()> {
    if tape.shape(a) != tape.shape(b) {
        return Err(Error::dim(format!(
            "{op}: {:?} vs {:?}",
            tape.shape(a),
            tape.shape(b)
        )));
    }
    Ok(())
}

/// `(outer, axis_len, inner)` split of `shape` around `axis`.
fn split_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

impl Tape {
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self, a, b, "add")?;
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x + y)
            .collect();
        let value = Tensor::new(self.shape(a).to_vec(), data)?;
        Ok(self.push(
            &[a, b],
            value,
            Box::new(|g, _, _, _| vec![Some(g.to_vec()), Some(g.to_vec())]),
        ))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self, a, b, "sub")?;
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x - y)
            .collect();
        let value = Tensor::new(self.shape(a).to_vec(), data)?;
        Ok(self.push(
            &[a, b],
            value,
            Box::new(|g, _, _, _| vec![Some(g.to_vec()), Some(g.iter().map(|v| -v).collect())]),
        ))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self, a, b, "mul")?;
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x * y)
            .collect();
        let value = Tensor::new(self.shape(a).to_vec(), data)?;
        Ok(self.push(
            &[a, b],
            value,
            Box::new(|g, p, _, need| {
                let ga = need[0].then(|| g.iter().zip(p[1].data()).map(|(g, y)| g * y).collect());
                let gb = need[1].then(|| g.iter().zip(p[0].data()).map(|(g, x)| g * x).collect());
                vec![ga, gb]
            }),
        ))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let value = Tensor {
            shape: self.shape(a).to_vec(),
            data: self.value(a).data().iter().map(|x| x * factor).collect(),
        };
        self.push(
            &[a],
            value,
            Box::new(move |g, _, _, _| vec![Some(g.iter().map(|v| v * factor).collect())]),
        )
    }

    /// Adds a per-channel bias over the last axis.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let c = *self.shape(x).last().unwrap();
        if self.shape(bias) != [c] {
            return Err(Error::dim(format!(
                "bias {:?} for input {:?}",
                self.shape(bias),
                self.shape(x)
            )));
        }
        let b = self.value(bias).data().to_vec();
        let data = self
            .value(x)
            .data()
            .chunks(c)
            .flat_map(|row| row.iter().zip(&b).map(|(v, b)| v + b))
            .collect();
        let value = Tensor::new(self.shape(x).to_vec(), data)?;
        Ok(self.push(
            &[x, bias],
            value,
            Box::new(move |g, _, _, need| {
                let gb = need[1].then(|| {
                    let mut gb = vec![0.0; c];
                    for row in g.chunks(c) {
                        gb.iter_mut().zip(row).for_each(|(a, b)| *a += b);
                    }
                    gb
                });
                vec![need[0].then(|| g.to_vec()), gb]
            }),
        ))
    }

    /// `(m, k) x (k, n) -> (m, n)`
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::dim(format!("matmul {sa:?} x {sb:?}")));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let mut out = vec![0.0; m * n];
        gemm_nn(self.value(a).data(), self.value(b).data(), &mut out, m, k, n);
        let value = Tensor::new(vec![m, n], out)?;
        Ok(self.push(
            &[a, b],
            value,
            Box::new(move |g, p, _, need| {
                let ga = need[0].then(|| {
                    let mut ga = vec![0.0; m * k];
                    gemm_nt(g, p[1].data(), &mut ga, m, k, n);
                    ga
                });
                let gb = need[1].then(|| {
                    let mut gb = vec![0.0; k * n];
                    gemm_tn(p[0].data(), g, &mut gb, m, k, n);
                    gb
                });
                vec![ga, gb]
            }),
        ))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(a).clone().reshaped(shape)?;
        Ok(self.push(&[a], value, Box::new(|g, _, _, _| vec![Some(g.to_vec())])))
    }

    /// Concatenate along `axis`; all other dimensions must agree.
    pub fn concat(&mut self, vars: &[Var], axis: usize) -> Result<Var> {
        let first = self.shape(vars[0]).to_vec();
        if axis >= first.len() {
            return Err(Error::dim(format!("concat axis {axis} for {first:?}")));
        }
        let mut lens = Vec::with_capacity(vars.len());
        for &v in vars {
            let s = self.shape(v);
            let ok = s.len() == first.len()
                && s.iter()
                    .zip(&first)
                    .enumerate()
                    .all(|(i, (a, b))| i == axis || a == b);
            if !ok {
                return Err(Error::dim(format!("concat {first:?} with {s:?}")));
            }
            lens.push(s[axis]);
        }
        let total: usize = lens.iter().sum();
        let (outer, _, inner) = split_axis(&first, axis);
        let mut data = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for (&v, &len) in vars.iter().zip(&lens) {
                let src = self.value(v).data();
                data.extend_from_slice(&src[o * len * inner..(o + 1) * len * inner]);
            }
        }
        let mut shape = first;
        shape[axis] = total;
        let value = Tensor::new(shape, data)?;
        Ok(self.push(
            vars,
            value,
            Box::new(move |g, _, _, need| {
                let mut offset = 0;
                lens.iter()
                    .zip(need)
                    .map(|(&len, &need)| {
                        let start = offset;
                        offset += len;
                        need.then(|| {
                            (0..outer)
                                .flat_map(|o| {
                                    let base = (o * total + start) * inner;
                                    g[base..base + len * inner].iter().copied()
                                })
                                .collect()
                        })
                    })
                    .collect()
            }),
        ))
    }

    /// `a[.., start..end, ..]` along `axis`.
    pub fn slice(&mut self, a: Var, axis: usize, start: usize, end: usize) -> Result<Var> {
        let shape = self.shape(a).to_vec();
        if axis >= shape.len() || start >= end || end > shape[axis] {
            return Err(Error::dim(format!(
                "slice {start}..{end} on axis {axis} of {shape:?}"
            )));
        }
        let (outer, len, inner) = split_axis(&shape, axis);
        let width = end - start;
        let src = self.value(a).data();
        let data: Vec<f64> = (0..outer)
            .flat_map(|o| {
                let base = (o * len + start) * inner;
                src[base..base + width * inner].iter().copied()
            })
            .collect();
        let mut out_shape = shape;
        out_shape[axis] = width;
        let value = Tensor::new(out_shape, data)?;
        Ok(self.push(
            &[a],
            value,
            Box::new(move |g, _, _, _| {
                let mut ga = vec![0.0; outer * len * inner];
                for o in 0..outer {
                    let base = (o * len + start) * inner;
                    ga[base..base + width * inner]
                        .copy_from_slice(&g[o * width * inner..(o + 1) * width * inner]);
                }
                vec![Some(ga)]
            }),
        ))
    }

    fn unary<F, D>(&mut self, a: Var, f: F, df: D) -> Var
    where
        F: Fn(f64) -> f64,
        D: Fn(f64, f64) -> f64 + 'static,
    {
        let value = Tensor {
            shape: self.shape(a).to_vec(),
            data: self.value(a).data().iter().map(|&x| f(x)).collect(),
        };
        self.push(
            &[a],
            value,
            Box::new(move |g, p, out, _| {
                vec![Some(
                    g.iter()
                        .zip(p[0].data())
                        .zip(out.data())
                        .map(|((g, &x), &y)| g * df(x, y))
                        .collect(),
                )]
            }),
        )
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.max(0.0), |x, _| if x > 0.0 { 1.0 } else { 0.0 })
    }

    pub fn leaky_relu(&mut self, a: Var, alpha: f64) -> Var {
        self.unary(
            a,
            move |x| if x > 0.0 { x } else { alpha * x },
            move |x, _| if x > 0.0 { 1.0 } else { alpha },
        )
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, sigmoid, |_, y| y * (1.0 - y))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, f64::tanh, |_, y| 1.0 - y * y)
    }

    /// Softmax over the last axis.
    pub fn softmax(&mut self, a: Var) -> Var {
        let k = *self.shape(a).last().unwrap();
        let data: Vec<f64> = self
            .value(a)
            .data()
            .chunks(k)
            .flat_map(softmax_row)
            .collect();
        let value = Tensor {
            shape: self.shape(a).to_vec(),
            data,
        };
        self.push(
            &[a],
            value,
            Box::new(move |g, _, out, _| {
                let mut ga = Vec::with_capacity(g.len());
                for (gr, yr) in g.chunks(k).zip(out.data().chunks(k)) {
                    let dot: f64 = gr.iter().zip(yr).map(|(g, y)| g * y).sum();
                    ga.extend(gr.iter().zip(yr).map(|(g, y)| y * (g - dot)));
                }
                vec![Some(ga)]
            }),
        )
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let n = self.value(a).len();
        let value = Tensor::scalar(pairwise_sum(self.value(a).data()));
        self.push(&[a], value, Box::new(move |g, _, _, _| vec![Some(vec![g[0]; n])]))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.value(a).len();
        let s = self.sum(a);
        self.scale(s, 1.0 / n as f64)
    }

    /// `sum_i weights[i] * (values[i] - targets[i])^2`.
    pub fn weighted_sse(&mut self, values: Var, targets: Var, weights: Arc<Vec<f64>>) -> Result<Var> {
        same_shape(self, values, targets, "weighted_sse")?;
        if weights.len() != self.value(values).len() {
            return Err(Error::dim(format!(
                "weighted_sse: {} weights for {} values",
                weights.len(),
                self.value(values).len()
            )));
        }
        let terms: Vec<f64> = self
            .value(values)
            .data()
            .iter()
            .zip(self.value(targets).data())
            .zip(weights.iter())
            .map(|((v, t), w)| w * (v - t) * (v - t))
            .collect();
        let value = Tensor::scalar(pairwise_sum(&terms));
        Ok(self.push(
            &[values, targets],
            value,
            Box::new(move |g, p, _, need| {
                let diff: Vec<f64> = p[0]
                    .data()
                    .iter()
                    .zip(p[1].data())
                    .zip(weights.iter())
                    .map(|((v, t), w)| 2.0 * g[0] * w * (v - t))
                    .collect();
                let gt = need[1].then(|| diff.iter().map(|d| -d).collect());
                vec![need[0].then_some(diff), gt]
            }),
        ))
    }

    /// `out[i] = a.flat[indices[i]]`; the backward pass scatter-adds.
    pub fn gather(&mut self, a: Var, indices: Arc<Vec<usize>>) -> Result<Var> {
        let src = self.value(a).data();
        let n = src.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::dim(format!("gather index {bad} into {n} values")));
        }
        let data = indices.iter().map(|&i| src[i]).collect();
        let value = Tensor::new(vec![indices.len()], data)?;
        Ok(self.push(
            &[a],
            value,
            Box::new(move |g, _, _, _| {
                let mut ga = vec![0.0; n];
                for (&i, &gv) in indices.iter().zip(g) {
                    ga[i] += gv;
                }
                vec![Some(ga)]
            }),
        ))
    }

    /// Mean binary cross-entropy of `sigmoid(logits)` against 0/1 targets.
    pub fn bce_with_logits(&mut self, logits: Var, targets: &[f64]) -> Result<Var> {
        let n = self.value(logits).len();
        if targets.len() != n {
            return Err(Error::dim(format!("{} targets for {n} logits", targets.len())));
        }
        let targets = targets.to_vec();
        let terms: Vec<f64> = self
            .value(logits)
            .data()
            .iter()
            .zip(&targets)
            .map(|(&x, &t)| x.max(0.0) - x * t + (-x.abs()).exp().ln_1p())
            .collect();
        let value = Tensor::scalar(pairwise_sum(&terms) / n as f64);
        Ok(self.push(
            &[logits],
            value,
            Box::new(move |g, p, _, _| {
                let s = g[0] / n as f64;
                vec![Some(
                    p[0].data()
                        .iter()
                        .zip(&targets)
                        .map(|(&x, &t)| s * (sigmoid(x) - t))
                        .collect(),
                )]
            }),
        ))
    }

    /// Mean categorical cross-entropy of `softmax(logits)` rows against
    /// integer labels.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let shape = self.shape(logits).to_vec();
        if shape.len() != 2 || shape[0] != labels.len() {
            return Err(Error::dim(format!(
                "cross-entropy logits {shape:?} for {} labels",
                labels.len()
            )));
        }
        let (rows, k) = (shape[0], shape[1]);
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::Label {
                label: bad,
                class_count: k,
            });
        }
        let labels = labels.to_vec();
        let probs: Vec<f64> = self
            .value(logits)
            .data()
            .chunks(k)
            .flat_map(softmax_row)
            .collect();
        let terms: Vec<f64> = labels
            .iter()
            .enumerate()
            .map(|(r, &l)| {
                let row = &self.value(logits).data()[r * k..(r + 1) * k];
                log_sum_exp(row) - row[l]
            })
            .collect();
        let value = Tensor::scalar(pairwise_sum(&terms) / rows as f64);
        Ok(self.push(
            &[logits],
            value,
            Box::new(move |g, _, _, _| {
                let s = g[0] / rows as f64;
                let mut ga: Vec<f64> = probs.iter().map(|p| s * p).collect();
                for (r, &l) in labels.iter().enumerate() {
                    ga[r * k + l] -= s;
                }
                vec![Some(ga)]
            }),
        ))
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn softmax_row(row: &[f64]) -> Vec<f64> {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = row.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}
