//! Mini-batch training with validation-AUROC early stopping.

use alloc::format;
use alloc::vec::Vec;

use crate::data::{batch_visit_refs, PatientRecord};
use crate::error::{Error, Result};
use crate::eval::auroc;
use crate::math;
use crate::models::{arch_display, batch_loss, bind, predict_probs, ModelSpec, ParameterSet};
use crate::rng::Rng;
use crate::tape::Tape;

use super::{Optimizer, OptimizerConfig};

/// Validation improvements smaller than this do not reset patience.
const IMPROVEMENT_THRESHOLD: f64 = 1e-4;

/// Loop controls; the optimizer's own settings live in [`OptimizerConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub seed: u64,
    /// Global gradient-norm ceiling; tanh RNNs are the usual customer.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { max_epochs: 100, batch_size: 128, patience: 5, seed: 0, clip_norm: None }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 || self.batch_size == 0 || self.patience == 0 {
            return Err(Error::Invalid(
                "max_epochs, batch_size and patience must be positive".into(),
            ));
        }
        if let Some(clip) = self.clip_norm {
            if !(clip > 0.0) || !clip.is_finite() {
                return Err(Error::Invalid(format!("clip_norm must be positive, got {clip}")));
            }
        }
        Ok(())
    }
}

/// One line of training history.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_auroc: f64,
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the epoch with the highest validation AUROC.
    pub params: ParameterSet,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_valid_auroc: f64,
}

fn validation_auroc(
    spec: &ModelSpec,
    params: &ParameterSet,
    valid: &[&PatientRecord],
    batch_size: usize,
) -> Result<f64> {
    let mut scores = Vec::with_capacity(valid.len());
    let mut labels = Vec::with_capacity(valid.len());
    for batch in batch_visit_refs(valid, batch_size)? {
        scores.extend(predict_probs(spec, params, &batch)?);
        labels.extend(batch.labels.iter().map(|&y| y as u8));
    }
    auroc(&scores, &labels)
}

/// Trains one model: per epoch a seeded shuffle, mini-batch BCE steps and a
/// validation pass; keeps the best-validation parameters and stops once
/// `patience` epochs go by without a meaningful improvement.
pub fn train_model(
    spec: &ModelSpec,
    mut params: ParameterSet,
    train: &[PatientRecord],
    valid: &[PatientRecord],
    opt_cfg: &OptimizerConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    spec.validate()?;
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Invalid(format!("no training records for {}", arch_display(spec))));
    }
    let has = |records: &[PatientRecord], y: u8| records.iter().any(|r| r.label == y);
    if !has(valid, 0) || !has(valid, 1) {
        return Err(Error::Invalid(
            "validation set needs both classes for AUROC".into(),
        ));
    }

    let mut optimizer = Optimizer::new(opt_cfg.clone())?;
    let root = Rng::new(cfg.seed);
    let valid_refs: Vec<&PatientRecord> = valid.iter().collect();

    let mut history = Vec::new();
    let mut best: Option<(f64, usize, ParameterSet)> = None;
    let mut anchor = f64::NEG_INFINITY;
    let mut stale_epochs = 0;

    for epoch in 1..=cfg.max_epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        root.stream("shuffle", epoch as u64).shuffle(&mut order);

        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let refs: Vec<&PatientRecord> = chunk.iter().map(|&i| &train[i]).collect();
            let batch = batch_visit_refs(&refs, refs.len())?.remove(0);

            let mut tape = Tape::new();
            let bound = bind(&mut tape, &params);
            let loss = batch_loss(&mut tape, &bound, spec, &batch)?;
            let loss_value = tape.value(loss).data()[0];
            if !loss_value.is_finite() {
                return Err(Error::NonFinite(format!(
                    "training loss for {} at epoch {epoch}",
                    arch_display(spec)
                )));
            }
            tape.backward(loss)?;
            loss_sum += loss_value * batch.size as f64;
            seen += batch.size;

            let scale = match cfg.clip_norm {
                Some(clip) => {
                    let mut sq = 0.0;
                    for (_, var) in bound.iter() {
                        sq += tape.grad(var)?.iter().map(|g| g * g).sum::<f64>();
                    }
                    let norm = math::sqrt(sq);
                    if norm > clip {
                        clip / norm
                    } else {
                        1.0
                    }
                }
                None => 1.0,
            };

            optimizer.begin_step();
            for (name, var) in bound.iter() {
                let tensor = params
                    .tensors
                    .get_mut(name)
                    .ok_or_else(|| Error::Invalid(format!("lost parameter {name:?}")))?;
                if scale != 1.0 {
                    let scaled: Vec<f64> = tape.grad(var)?.iter().map(|g| g * scale).collect();
                    optimizer.update(name, tensor, &scaled)?;
                } else {
                    optimizer.update(name, tensor, tape.grad(var)?)?;
                }
            }
        }

        let eval_override = optimizer.eval_params(&params)?;
        let eval = eval_override.as_ref().unwrap_or(&params);
        let valid_auroc = validation_auroc(spec, eval, &valid_refs, cfg.batch_size)?;
        history.push(EpochStats { epoch, train_loss: loss_sum / seen as f64, valid_auroc });

        if best.as_ref().map_or(true, |(b, _, _)| valid_auroc > *b) {
            best = Some((valid_auroc, epoch, eval.clone()));
        }
        if valid_auroc > anchor + IMPROVEMENT_THRESHOLD {
            anchor = valid_auroc;
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= cfg.patience {
                break;
            }
        }
    }

    let (best_valid_auroc, best_epoch, best_params) = best.expect("max_epochs is positive");
    Ok(TrainOutcome { params: best_params, history, best_epoch, best_valid_auroc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Visit;
    use crate::models::{flatten, init_params, Architecture};
    use crate::optim::Family;

    fn record(id: usize, label: u8, codes_by_visit: &[&[u32]]) -> PatientRecord {
        PatientRecord {
            patient_id: format!("p{id}"),
            label,
            visits: codes_by_visit
                .iter()
                .enumerate()
                .map(|(t, codes)| Visit {
                    delta_days: if t == 0 { 0 } else { 7 },
                    codes: codes.to_vec(),
                })
                .collect(),
        }
    }

    /// Two disjoint code sets; positives draw from {1,2,3}, negatives from
    /// {4,5,6}. Linearly separable even as a bag.
    fn separable_cohort(n: usize, seed: u64) -> Vec<PatientRecord> {
        let mut rng = Rng::new(seed);
        (0..n)
            .map(|i| {
                let label = u8::from(i % 2 == 0);
                let base = if label == 1 { 1 } else { 4 };
                let visits: Vec<Vec<u32>> = (0..1 + rng.below(3))
                    .map(|_| {
                        (0..1 + rng.below(2)).map(|_| base + rng.below(3) as u32).collect()
                    })
                    .collect();
                let refs: Vec<&[u32]> = visits.iter().map(|v| v.as_slice()).collect();
                record(i, label, &refs)
            })
            .collect()
    }

    fn quick_cfg(seed: u64) -> TrainConfig {
        TrainConfig { max_epochs: 50, batch_size: 16, patience: 5, seed, clip_norm: None }
    }

    #[test]
    fn separable_cohort_reaches_perfect_validation_auroc() {
        let spec = ModelSpec::new(Architecture::parse("GRU").unwrap(), 8, 8);
        let params = init_params(&spec, 7, 5).unwrap();
        let train = separable_cohort(60, 1);
        let valid = separable_cohort(20, 2);
        let mut opt = OptimizerConfig::new(Family::Adam);
        opt.lr = 0.01;
        let out = train_model(&spec, params, &train, &valid, &opt, &quick_cfg(3)).unwrap();
        assert_eq!(out.best_valid_auroc, 1.0, "history: {:?}", out.history);
        assert!(out.history.len() <= 50);
    }

    #[test]
    fn training_is_deterministic() {
        let spec = ModelSpec::new(Architecture::parse("LR").unwrap(), 4, 4);
        let train = separable_cohort(40, 7);
        let valid = separable_cohort(16, 8);
        let opt = OptimizerConfig::new(Family::Rmsprop);
        let mut cfg = quick_cfg(11);
        cfg.max_epochs = 6;
        let run = || {
            let params = init_params(&spec, 7, 21).unwrap();
            train_model(&spec, params, &train, &valid, &opt, &cfg).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(flatten(&a.params).data(), flatten(&b.params).data());
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn returned_params_match_history_maximum() {
        let spec = ModelSpec::new(Architecture::parse("GRU").unwrap(), 4, 4);
        let params = init_params(&spec, 7, 2).unwrap();
        let train = separable_cohort(40, 3);
        let valid = separable_cohort(20, 4);
        let mut opt = OptimizerConfig::new(Family::Sgd);
        opt.lr = 0.5;
        let mut cfg = quick_cfg(5);
        cfg.max_epochs = 8;
        let out = train_model(&spec, params, &train, &valid, &opt, &cfg).unwrap();
        let max = out.history.iter().map(|e| e.valid_auroc).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(out.best_valid_auroc, max);
        let best_line = out.history.iter().find(|e| e.epoch == out.best_epoch).unwrap();
        assert_eq!(best_line.valid_auroc, max);

        // Re-scoring the returned parameters reproduces the recorded value.
        let refs: Vec<&PatientRecord> = valid.iter().collect();
        let rescored = validation_auroc(&spec, &out.params, &refs, cfg.batch_size).unwrap();
        assert_eq!(rescored, max);
    }

    #[test]
    fn single_class_validation_is_rejected() {
        let spec = ModelSpec::new(Architecture::parse("LR").unwrap(), 4, 4);
        let params = init_params(&spec, 7, 2).unwrap();
        let train = separable_cohort(10, 3);
        let valid: Vec<PatientRecord> =
            separable_cohort(10, 4).into_iter().filter(|r| r.label == 1).collect();
        let err = train_model(
            &spec,
            params,
            &train,
            &valid,
            &OptimizerConfig::new(Family::Adam),
            &quick_cfg(1),
        );
        assert!(err.is_err());
    }

    #[test]
    fn constant_validation_stops_after_patience() {
        // An LR model with lr tiny enough that the ranking never moves:
        // every epoch scores the same AUROC, so epoch patience+1 is last.
        let spec = ModelSpec::new(Architecture::parse("LR").unwrap(), 4, 4);
        let params = init_params(&spec, 7, 9).unwrap();
        let train = separable_cohort(20, 5);
        let valid = separable_cohort(10, 6);
        let mut opt = OptimizerConfig::new(Family::Sgd);
        opt.lr = 1e-12;
        let cfg = TrainConfig { max_epochs: 30, patience: 5, ..quick_cfg(7) };
        let out = train_model(&spec, params, &train, &valid, &opt, &cfg).unwrap();
        assert_eq!(out.history.len(), 6);
    }

    #[test]
    fn clipped_vanilla_rnn_trains() {
        let spec = ModelSpec::new(Architecture::parse("Vanilla-RNN").unwrap(), 6, 6);
        let params = init_params(&spec, 7, 4).unwrap();
        let train = separable_cohort(40, 9);
        let valid = separable_cohort(20, 10);
        let mut cfg = quick_cfg(13);
        cfg.clip_norm = Some(5.0);
        cfg.max_epochs = 20;
        let mut opt = OptimizerConfig::new(Family::Adam);
        opt.lr = 0.01;
        let out = train_model(&spec, params, &train, &valid, &opt, &cfg).unwrap();
        assert!(out.best_valid_auroc > 0.9, "history: {:?}", out.history);
    }
}
