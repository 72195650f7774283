use std::collections::HashMap;

use super::{Checkpoint, Gradients, NamedTensor, Tape, Tensor};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
    /// Non-trainable entries (batch-norm running statistics) are saved in
    /// checkpoints but never receive gradients or optimizer updates.
    pub trainable: bool,
}

/// Named parameters in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    entries: Vec<ParamEntry>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, value: Tensor, trainable: bool) -> Result<()> {
        if self.index.contains_key(name) {
            return Err(Error::Config(format!("duplicate parameter '{name}'")));
        }
        let grad = Tensor::zeros(value.shape());
        self.index.insert(name.to_string(), self.entries.len());
        self.entries.push(ParamEntry {
            name: name.to_string(),
            value,
            grad,
            trainable,
        });
        Ok(())
    }

    pub fn entry(&self, name: &str) -> Option<&ParamEntry> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub fn entry_mut(&mut self, name: &str) -> Option<&mut ParamEntry> {
        self.index.get(name).map(|&i| &mut self.entries[i])
    }

    pub fn value(&self, name: &str) -> Result<&Tensor> {
        self.entry(name)
            .map(|e| &e.value)
            .ok_or_else(|| Error::Config(format!("unknown parameter '{name}'")))
    }

    pub fn value_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.entry_mut(name)
            .map(|e| &mut e.value)
            .ok_or_else(|| Error::Config(format!("unknown parameter '{name}'")))
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [ParamEntry] {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of trainable scalars.
    pub fn trainable_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.trainable)
            .map(|e| e.value.len())
            .sum()
    }

    pub fn zero_grad(&mut self) {
        for e in &mut self.entries {
            e.grad.data_mut().iter_mut().for_each(|g| *g = 0.0);
        }
    }

    /// Add the gradients of every parameter of this store recorded on
    /// `tape`; names from other stores are skipped.
    pub fn accumulate(&mut self, tape: &Tape, grads: &Gradients) {
        for (name, var) in tape.params() {
            let Some(g) = grads.get(*var) else {
                continue;
            };
            let Some(&i) = self.index.get(name) else {
                continue;
            };
            let e = &mut self.entries[i];
            if e.trainable {
                e.grad
                    .data_mut()
                    .iter_mut()
                    .zip(g)
                    .for_each(|(a, b)| *a += b);
            }
        }
    }

    /// All entries as `f32` checkpoint tensors, prefixed by `prefix`.
    pub fn to_checkpoint(&self, prefix: &str, ckpt: &mut Checkpoint) {
        for e in &self.entries {
            ckpt.push(NamedTensor::from_tensor(&format!("{prefix}{}", e.name), &e.value));
        }
    }

    /// Overwrite every entry from `ckpt`; shapes must match exactly.
    pub fn load_checkpoint(&mut self, prefix: &str, ckpt: &Checkpoint) -> Result<()> {
        for e in &mut self.entries {
            let name = format!("{prefix}{}", e.name);
            let t = ckpt
                .get(&name)
                .ok_or_else(|| Error::Format(format!("checkpoint lacks tensor '{name}'")))?;
            let value = t.to_tensor()?;
            if value.shape() != e.value.shape() {
                return Err(Error::Format(format!(
                    "tensor '{name}' has shape {:?}, expected {:?}",
                    value.shape(),
                    e.value.shape()
                )));
            }
            e.value = value;
        }
        Ok(())
    }
}
