use super::{Checkpoint, NamedTensor, ParamStore, Tensor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| b > 0.0 && b < 1.0;
        if !(self.lr > 0.0 && self.epsilon > 0.0 && unit(self.beta1) && unit(self.beta2)) {
            return Err(Error::Config(format!("invalid Adam settings {self:?}")));
        }
        Ok(())
    }
}

/// First and second moments of one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// One bias-corrected Adam update of `param` in place.
pub fn adam_step(config: &AdamConfig, state: &mut AdamState, param: &mut Tensor, grad: &Tensor) -> Result<()> {
    if param.shape() != grad.shape() || state.m.len() != param.len() {
        return Err(Error::dim(format!(
            "adam: param {:?}, grad {:?}, state {}",
            param.shape(),
            grad.shape(),
            state.m.len()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    for (((p, &g), m), v) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        *m = config.beta1 * *m + (1.0 - config.beta1) * g;
        *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
        *p -= config.lr * (*m / c1) / ((*v / c2).sqrt() + config.epsilon);
    }
    Ok(())
}

/// Adam over every trainable entry of a [`ParamStore`].
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    states: Vec<(String, AdamState)>,
}

impl Adam {
    pub fn new(config: AdamConfig, store: &ParamStore) -> Result<Self> {
        config.validate()?;
        let states = store
            .entries()
            .iter()
            .filter(|e| e.trainable)
            .map(|e| (e.name.clone(), AdamState::new(e.value.len())))
            .collect();
        Ok(Adam {
            config,
            step: 0,
            states,
        })
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Update all trainable parameters from their accumulated gradients.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<()> {
        self.step += 1;
        for (name, state) in &mut self.states {
            let e = store
                .entry_mut(name)
                .ok_or_else(|| Error::Config(format!("optimizer parameter '{name}' vanished")))?;
            adam_step(&self.config, state, &mut e.value, &e.grad)?;
        }
        Ok(())
    }

    fn step_key(tag: &str) -> String {
        if tag.is_empty() {
            "adam/step".to_string()
        } else {
            format!("adam/step/{tag}")
        }
    }

    /// Moments go to `adam/m/<param>` and `adam/v/<param>`; the step count
    /// to `adam/step` (or `adam/step/<tag>` when several optimizers share
    /// one checkpoint).
    pub fn to_checkpoint(&self, tag: &str, ckpt: &mut Checkpoint) {
        ckpt.push(NamedTensor::new(&Self::step_key(tag), vec![1], vec![self.step as f32]));
        for (name, s) in &self.states {
            let shape = vec![s.m.len() as u32];
            let m = s.m.iter().map(|&x| x as f32).collect();
            let v = s.v.iter().map(|&x| x as f32).collect();
            ckpt.push(NamedTensor::new(&format!("adam/m/{name}"), shape.clone(), m));
            ckpt.push(NamedTensor::new(&format!("adam/v/{name}"), shape, v));
        }
    }

    pub fn load_checkpoint(&mut self, tag: &str, ckpt: &Checkpoint) -> Result<()> {
        let missing = |n: &str| Error::Format(format!("checkpoint lacks '{n}'"));
        let key = Self::step_key(tag);
        let step = ckpt.get(&key).ok_or_else(|| missing(&key))?;
        self.step = step.data.first().copied().unwrap_or(0.0) as u64;
        for (name, s) in &mut self.states {
            for (key, dst) in [("m", &mut s.m), ("v", &mut s.v)] {
                let full = format!("adam/{key}/{name}");
                let t = ckpt.get(&full).ok_or_else(|| missing(&full))?;
                if t.data.len() != dst.len() {
                    return Err(Error::Format(format!("'{full}' has {} values, expected {}", t.data.len(), dst.len())));
                }
                dst.iter_mut().zip(&t.data).for_each(|(d, &x)| *d = x as f64);
            }
            s.step = self.step;
        }
        Ok(())
    }
}
