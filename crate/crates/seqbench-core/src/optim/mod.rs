//! The seven first-order optimizers and the training loop.

mod train;

pub use train::{train_model, EpochStats, TrainConfig, TrainOutcome};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::models::ParameterSet;
use crate::tensor::Tensor;

/// Optimizer family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Adam,
    Adamax,
    Adagrad,
    Adadelta,
    Rmsprop,
    Asgd,
    Sgd,
}

impl Family {
    pub fn all() -> [Family; 7] {
        [
            Family::Adam,
            Family::Adamax,
            Family::Adagrad,
            Family::Adadelta,
            Family::Rmsprop,
            Family::Asgd,
            Family::Sgd,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Adam => "adam",
            Family::Adamax => "adamax",
            Family::Adagrad => "adagrad",
            Family::Adadelta => "adadelta",
            Family::Rmsprop => "rmsprop",
            Family::Asgd => "asgd",
            Family::Sgd => "sgd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::all()
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown optimizer {s:?}")))
    }

    /// Customary step size when none is supplied.
    pub fn default_lr(&self) -> f64 {
        match self {
            Family::Adam => 1e-3,
            Family::Adamax => 2e-3,
            Family::Adagrad => 0.1,
            Family::Adadelta => 1.0,
            Family::Rmsprop => 0.01,
            Family::Asgd | Family::Sgd => 0.1,
        }
    }

    fn default_eps(&self) -> f64 {
        match self {
            Family::Adadelta => 1e-6,
            Family::Adagrad => 1e-10,
            _ => 1e-8,
        }
    }
}

/// Hyperparameters shared by every family; the moment coefficients only
/// matter where the family reads them.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub family: Family,
    pub lr: f64,
    pub weight_decay: f64,
    pub eps: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub momentum: f64,
}

impl OptimizerConfig {
    pub fn new(family: Family) -> Self {
        OptimizerConfig {
            family,
            lr: family.default_lr(),
            weight_decay: 0.0,
            eps: family.default_eps(),
            beta1: 0.9,
            beta2: 0.999,
            rho: 0.9,
            momentum: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::Invalid(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::Invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Invalid(format!(
                "weight_decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        for (name, v) in
            [("beta1", self.beta1), ("beta2", self.beta2), ("rho", self.rho)]
        {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Invalid(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Invalid(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// Per-tensor accumulators; which ones a family touches varies.
#[derive(Debug, Clone, Default)]
struct Slot {
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Stateful update engine for one parameter set.
#[derive(Debug, Clone)]
pub struct Optimizer {
    cfg: OptimizerConfig,
    step_count: u64,
    slots: BTreeMap<String, Slot>,
}

impl Optimizer {
    pub fn new(cfg: OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Optimizer { cfg, step_count: 0, slots: BTreeMap::new() })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    /// Call once per optimizer step, before the per-tensor updates; Adam-style
    /// bias corrections and the ASGD average key off the step index.
    pub fn begin_step(&mut self) {
        self.step_count += 1;
    }

    /// Applies one family update to a single named tensor in place.
    pub fn update(&mut self, name: &str, w: &mut Tensor, grad: &[f64]) -> Result<()> {
        if grad.len() != w.len() {
            return Err(Error::Shape(format!(
                "{name}: {} gradient values for {} parameters",
                grad.len(),
                w.len()
            )));
        }
        if let Some(pos) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient of {name} at {pos}")));
        }
        if self.step_count == 0 {
            self.step_count = 1;
        }
        let t = self.step_count;
        let cfg = self.cfg.clone();
        let n = w.len();
        let slot = self.slots.entry(String::from(name)).or_default();
        let data = w.data_mut();

        // Coupled L2: the decay joins the gradient before any accumulator.
        let g: Vec<f64> = (0..n).map(|i| grad[i] + cfg.weight_decay * data[i]).collect();

        match cfg.family {
            Family::Sgd => {
                if cfg.momentum > 0.0 {
                    if slot.a.is_empty() {
                        slot.a = vec![0.0; n];
                    }
                    for i in 0..n {
                        slot.a[i] = cfg.momentum * slot.a[i] + g[i];
                        data[i] -= cfg.lr * slot.a[i];
                    }
                } else {
                    for i in 0..n {
                        data[i] -= cfg.lr * g[i];
                    }
                }
            }
            Family::Asgd => {
                // Plain SGD steps; `a` tracks the running iterate average
                // that evaluation reads instead of the live weights.
                let fresh = slot.a.is_empty();
                if fresh {
                    slot.a = vec![0.0; n];
                }
                for i in 0..n {
                    data[i] -= cfg.lr * g[i];
                }
                for i in 0..n {
                    if fresh {
                        slot.a[i] = data[i];
                    } else {
                        slot.a[i] += (data[i] - slot.a[i]) / t as f64;
                    }
                }
            }
            Family::Adagrad => {
                if slot.a.is_empty() {
                    slot.a = vec![0.0; n];
                }
                for i in 0..n {
                    let g = g[i];
                    slot.a[i] += g * g;
                    data[i] -= cfg.lr * g / (math::sqrt(slot.a[i]) + cfg.eps);
                }
            }
            Family::Adadelta => {
                if slot.a.is_empty() {
                    slot.a = vec![0.0; n];
                    slot.b = vec![0.0; n];
                }
                for i in 0..n {
                    let g = g[i];
                    slot.a[i] = cfg.rho * slot.a[i] + (1.0 - cfg.rho) * g * g;
                    let step = math::sqrt(slot.b[i] + cfg.eps)
                        / math::sqrt(slot.a[i] + cfg.eps)
                        * g;
                    data[i] -= cfg.lr * step;
                    slot.b[i] = cfg.rho * slot.b[i] + (1.0 - cfg.rho) * step * step;
                }
            }
            Family::Rmsprop => {
                if slot.a.is_empty() {
                    slot.a = vec![0.0; n];
                }
                for i in 0..n {
                    let g = g[i];
                    slot.a[i] = cfg.rho * slot.a[i] + (1.0 - cfg.rho) * g * g;
                    data[i] -= cfg.lr * g / (math::sqrt(slot.a[i]) + cfg.eps);
                }
            }
            Family::Adam => {
                if slot.a.is_empty() {
                    slot.a = vec![0.0; n];
                    slot.b = vec![0.0; n];
                }
                let bc1 = 1.0 - math::powf(cfg.beta1, t as f64);
                let bc2 = 1.0 - math::powf(cfg.beta2, t as f64);
                for i in 0..n {
                    let g = g[i];
                    slot.a[i] = cfg.beta1 * slot.a[i] + (1.0 - cfg.beta1) * g;
                    slot.b[i] = cfg.beta2 * slot.b[i] + (1.0 - cfg.beta2) * g * g;
                    let m_hat = slot.a[i] / bc1;
                    let v_hat = slot.b[i] / bc2;
                    data[i] -= cfg.lr * m_hat / (math::sqrt(v_hat) + cfg.eps);
                }
            }
            Family::Adamax => {
                if slot.a.is_empty() {
                    slot.a = vec![0.0; n];
                    slot.b = vec![0.0; n];
                }
                let bc1 = 1.0 - math::powf(cfg.beta1, t as f64);
                for i in 0..n {
                    let g = g[i];
                    slot.a[i] = cfg.beta1 * slot.a[i] + (1.0 - cfg.beta1) * g;
                    let mag = math::abs(g);
                    slot.b[i] = if cfg.beta2 * slot.b[i] > mag { cfg.beta2 * slot.b[i] } else { mag };
                    data[i] -= cfg.lr * (slot.a[i] / bc1) / (slot.b[i] + cfg.eps);
                }
            }
        }
        Ok(())
    }

    /// The parameters evaluation should score. ASGD substitutes its running
    /// iterate average; every other family evaluates the live weights.
    pub fn eval_params(&self, params: &ParameterSet) -> Result<Option<ParameterSet>> {
        if self.cfg.family != Family::Asgd || self.step_count == 0 {
            return Ok(None);
        }
        let mut averaged = params.clone();
        for (name, tensor) in &mut averaged.tensors {
            let slot = self
                .slots
                .get(name)
                .ok_or_else(|| Error::Invalid(format!("asgd: no average for {name:?}")))?;
            tensor.data_mut().copy_from_slice(&slot.a);
        }
        Ok(Some(averaged))
    }
}
