use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tensor;
use crate::{Error, Result};

pub type Rng = ChaCha8Rng;

/// Counter-based generator for `seed`, on a stream selected by name so that
/// independent consumers never share draws.
pub fn seeded_rng(seed: u64, stream: &str) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(stream.as_bytes()));
    rng
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Uniform samples in `[-b, b]`, `b = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_init_with(fan_in: usize, fan_out: usize, shape: &[usize], rng: &mut Rng) -> Result<Tensor> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::Config(format!("glorot fans must be positive, got {fan_in}, {fan_out}")));
    }
    let b = glorot_bound(fan_in, fan_out);
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-b..=b)).collect();
    Tensor::new(shape.to_vec(), data)
}

pub fn glorot_init(fan_in: usize, fan_out: usize, shape: &[usize], seed: u64) -> Result<Tensor> {
    glorot_init_with(fan_in, fan_out, shape, &mut seeded_rng(seed, "glorot"))
}
