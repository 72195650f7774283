//! Central finite-difference gradient checks.

use rand::Rng as _;

use super::{seeded_rng, Tape, Tensor, Var};
use crate::Result;

/// Floor on the denominator of the relative error.
pub const GRADCHECK_FLOOR: f64 = 1e-6;

/// Largest relative error between the tape gradient and central differences
/// of `sum(f(inputs) * R)` for a fixed random `R`, over every input element.
pub fn max_gradient_error<F>(inputs: &[Tensor], eps: f64, seed: u64, f: F) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let probe = |inputs: &[Tensor], want_grad: bool| -> Result<(f64, Vec<Vec<f64>>)> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone(), true)).collect();
        let out = f(&mut tape, &vars)?;
        let mut rng = seeded_rng(seed, "gradcheck");
        let n = tape.value(out).len();
        let r = Tensor::new(
            tape.shape(out).to_vec(),
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )?;
        let r = tape.constant(r);
        let p = tape.mul(out, r)?;
        let loss = tape.sum(p);
        let value = tape.value(loss).item();
        if !want_grad {
            return Ok((value, Vec::new()));
        }
        let grads = tape.backward(loss)?;
        let g = vars
            .iter()
            .zip(inputs)
            .map(|(&v, t)| grads.get(v).map_or_else(|| vec![0.0; t.len()], <[f64]>::to_vec))
            .collect();
        Ok((value, g))
    };

    let (_, analytic) = probe(inputs, true)?;
    let mut worst = 0.0f64;
    let mut work = inputs.to_vec();
    for (ti, t) in inputs.iter().enumerate() {
        for i in 0..t.len() {
            let x = t.data()[i];
            work[ti].data_mut()[i] = x + eps;
            let (up, _) = probe(&work, false)?;
            work[ti].data_mut()[i] = x - eps;
            let (down, _) = probe(&work, false)?;
            work[ti].data_mut()[i] = x;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic[ti][i];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRADCHECK_FLOOR);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
