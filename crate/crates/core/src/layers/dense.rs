use crate::tensor::{glorot_init_with, ParamStore, Rng, Tape, Tensor, Var};
use crate::Result;

/// `y = x W + b` on `[batch, in]`, parameters `<name>/kernel` `(in, out)`
/// and `<name>/bias`.
#[derive(Debug, Clone)]
pub struct Dense {
    pub name: String,
    pub in_features: usize,
    pub out_features: usize,
}

impl Dense {
    pub fn new(name: &str, in_features: usize, out_features: usize) -> Self {
        Dense {
            name: name.to_string(),
            in_features,
            out_features,
        }
    }

    pub fn param_count(&self) -> usize {
        self.in_features * self.out_features + self.out_features
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        let (i, o) = (self.in_features, self.out_features);
        store.insert(&format!("{}/kernel", self.name), glorot_init_with(i, o, &[i, o], rng)?, true)?;
        store.insert(&format!("{}/bias", self.name), Tensor::zeros(&[o]), true)
    }

    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var) -> Result<Var> {
        let w = tape.param(store, &format!("{}/kernel", self.name))?;
        let b = tape.param(store, &format!("{}/bias", self.name))?;
        let y = tape.matmul(x, w)?;
        tape.add_bias(y, b)
    }
}
