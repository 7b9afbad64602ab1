use std::collections::BTreeMap;

use crate::error::{PareError, Result};
use crate::numerics::tensor::Tensor;

/// One named parameter: its value, a gradient accumulator of the same
/// shape, and whether L2 weight decay applies to it.
#[derive(Clone, Debug)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
    pub decay: bool,
}

/// Named map of learnable tensors with matching gradient accumulators.
///
/// Parameters are kept in a sorted map so that iteration order, checkpoint
/// serialization, and optimizer updates are deterministic.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    params: BTreeMap<String, Param>,
}

impl ParamStore {
    pub fn new() -> ParamStore {
        ParamStore {
            params: BTreeMap::new(),
        }
    }

    /// Register a parameter. `decay` marks it for L2 regularization
    /// (weights and embedding tables yes, biases and fusion logits no).
    pub fn register(&mut self, name: &str, value: Tensor, decay: bool) -> Result<()> {
        if self.params.contains_key(name) {
            return Err(PareError::numeric(format!(
                "parameter {name} registered twice"
            )));
        }
        let grad = Tensor::zeros(value.shape());
        self.params.insert(
            name.to_string(),
            Param {
                value,
                grad,
                decay,
            },
        );
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn value(&self, name: &str) -> Result<&Tensor> {
        self.params
            .get(name)
            .map(|p| &p.value)
            .ok_or_else(|| PareError::numeric(format!("unknown parameter {name}")))
    }

    pub fn value_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.params
            .get_mut(name)
            .map(|p| &mut p.value)
            .ok_or_else(|| PareError::numeric(format!("unknown parameter {name}")))
    }

    pub fn grad(&self, name: &str) -> Result<&Tensor> {
        self.params
            .get(name)
            .map(|p| &p.grad)
            .ok_or_else(|| PareError::numeric(format!("unknown parameter {name}")))
    }

    /// Accumulate into a parameter's gradient buffer.
    pub fn add_grad(&mut self, name: &str, delta: &Tensor) -> Result<()> {
        let param = self
            .params
            .get_mut(name)
            .ok_or_else(|| PareError::numeric(format!("unknown parameter {name}")))?;
        param.grad.add_assign(delta)
    }

    pub fn zero_grads(&mut self) {
        for param in self.params.values_mut() {
            param.grad.fill(0.0);
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Param)> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Param)> {
        self.params.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar values across all parameters.
    pub fn total_values(&self) -> usize {
        self.params.values().map(|p| p.value.len()).sum()
    }

    /// Copy of every parameter value, keyed by name.
    pub fn snapshot(&self) -> BTreeMap<String, Tensor> {
        self.params
            .iter()
            .map(|(name, p)| (name.clone(), p.value.clone()))
            .collect()
    }

    /// Restore values from a snapshot taken on the same store layout.
    pub fn restore(&mut self, snapshot: &BTreeMap<String, Tensor>) -> Result<()> {
        for (name, value) in snapshot {
            let param = self
                .params
                .get_mut(name)
                .ok_or_else(|| PareError::numeric(format!("unknown parameter {name}")))?;
            if param.value.shape() != value.shape() {
                return Err(PareError::numeric(format!(
                    "snapshot shape {} does not match parameter {name} shape {}",
                    value.shape_string(),
                    param.value.shape_string()
                )));
            }
            param.value = value.clone();
        }
        Ok(())
    }
}
