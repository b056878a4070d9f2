//! Study execution: turns planned trials into trained models and scores.
//!
//! The core's [`run_study`] owns scheduling and suggestion; this module owns
//! the wall clock and the worker pool. Rounds are evaluated on scoped
//! threads, one trial per worker, and results are collected in plan order,
//! so a study's trials are identical for any worker count; only the wall
//! time changes, and wall time never reaches the ledger.

use std::time::Instant;

use seqbench_core::data::{batch_visits, PatientRecord};
use seqbench_core::eval::auroc;
use seqbench_core::hpo::{run_study, PlannedTrial, Trial, TrialOutcome, TrialStatus};
use seqbench_core::models::{init_params, predict_probs, Architecture, Cell, ModelSpec};
use seqbench_core::optim::{train_model, OptimizerConfig, TrainConfig};

use crate::error::Result;
use crate::logging::Logger;

/// The three cohort splits a study trains and scores against.
#[derive(Debug, Clone, Copy)]
pub struct StudyData<'a> {
    pub train: &'a [PatientRecord],
    pub valid: &'a [PatientRecord],
    pub test: &'a [PatientRecord],
    /// Vocabulary ids including padding; sizes the embedding table.
    pub n_ids: usize,
}

/// Study-wide knobs. The per-trial optimizer settings come from the
/// suggested hyperparameters, not from here.
#[derive(Debug, Clone, Copy)]
pub struct StudyConfig {
    pub budget: usize,
    pub workers: usize,
    pub seed: u64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
}

impl StudyConfig {
    pub fn new(budget: usize, workers: usize, seed: u64) -> Self {
        StudyConfig { budget, workers, seed, max_epochs: 30, batch_size: 128, patience: 5 }
    }
}

/// Tanh RNN cells get a gradient-norm ceiling by default; gated cells and
/// the rest train unclipped.
pub fn default_clip(arch: Architecture) -> Option<f64> {
    match arch {
        Architecture::Recurrent { cell: Cell::Rnn, .. } => Some(5.0),
        _ => None,
    }
}

/// AUROC of a trained model over one split.
pub fn score_auroc(
    spec: &ModelSpec,
    params: &seqbench_core::models::ParameterSet,
    records: &[PatientRecord],
    batch_size: usize,
) -> Result<f64> {
    let mut scores = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for batch in batch_visits(records, batch_size)? {
        scores.extend(predict_probs(spec, params, &batch)?);
        labels.extend(batch.labels.iter().map(|&y| y as u8));
    }
    Ok(auroc(&scores, &labels)?)
}

fn try_trial(
    arch: Architecture,
    data: &StudyData,
    plan: &PlannedTrial,
    cfg: &StudyConfig,
) -> Result<(f64, f64)> {
    let spec = ModelSpec::new(arch, plan.hyper.embed_dim, plan.hyper.hidden_size);
    let mut opt = OptimizerConfig::new(plan.optimizer);
    opt.lr = plan.hyper.lr;
    opt.weight_decay = plan.hyper.weight_decay;
    opt.eps = plan.hyper.eps;
    let train_cfg = TrainConfig {
        max_epochs: cfg.max_epochs,
        batch_size: cfg.batch_size,
        patience: cfg.patience,
        seed: plan.seed,
        clip_norm: default_clip(arch),
    };
    let params = init_params(&spec, data.n_ids, plan.seed)?;
    let outcome = train_model(&spec, params, data.train, data.valid, &opt, &train_cfg)?;
    let test_auroc = score_auroc(&spec, &outcome.params, data.test, cfg.batch_size)?;
    Ok((outcome.best_valid_auroc, test_auroc))
}

/// Runs one trial end to end. Failures (divergence, degenerate shapes) are
/// folded into a `Failed` outcome with a floor score instead of propagating,
/// so one bad region cannot abort a study.
pub fn evaluate_trial(
    arch: Architecture,
    data: &StudyData,
    plan: &PlannedTrial,
    cfg: &StudyConfig,
    logger: &Logger,
) -> TrialOutcome {
    let start = Instant::now();
    let (outcome, note) = match try_trial(arch, data, plan, cfg) {
        Ok((valid_auroc, test_auroc)) => (
            TrialOutcome {
                valid_auroc,
                test_auroc,
                wall_seconds: start.elapsed().as_secs_f64(),
                status: TrialStatus::Ok,
            },
            format!("valid {valid_auroc:.4} test {test_auroc:.4}"),
        ),
        Err(e) => (
            TrialOutcome {
                valid_auroc: 0.0,
                test_auroc: 0.0,
                wall_seconds: start.elapsed().as_secs_f64(),
                status: TrialStatus::Failed,
            },
            format!("failed: {e}"),
        ),
    };
    logger.info(&format!(
        "{} trial {} [{} {}]: {note} ({:.1}s)",
        arch.name(),
        plan.index,
        plan.optimizer.as_str(),
        plan.hyper.describe(),
        outcome.wall_seconds
    ));
    outcome
}

/// Runs a full study for one architecture and returns its trials in order.
pub fn run_arch_study(
    arch: Architecture,
    data: &StudyData,
    cfg: &StudyConfig,
    logger: &Logger,
) -> Result<Vec<Trial>> {
    let trials = run_study(cfg.budget, cfg.workers, cfg.seed, |round: &[PlannedTrial]| {
        if round.len() <= 1 {
            round.iter().map(|plan| evaluate_trial(arch, data, plan, cfg, logger)).collect()
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = round
                    .iter()
                    .map(|plan| scope.spawn(move || evaluate_trial(arch, data, plan, cfg, logger)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("trial thread panicked")).collect()
            })
        }
    })?;
    Ok(trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logging::LogFormat;
    use seqbench_core::data::{generate_cohort, split_cohort, GeneratorSpec};

    fn tiny_study(workers: usize) -> Vec<Trial> {
        let (records, vocab) = generate_cohort(&GeneratorSpec::defaults(60, 24, 0.4, 3)).unwrap();
        let split = split_cohort(&records, (0.7, 0.1, 0.2), 3).unwrap();
        let data = StudyData {
            train: &split.train,
            valid: &split.valid,
            test: &split.test,
            n_ids: vocab.n_ids(),
        };
        let mut cfg = StudyConfig::new(3, workers, 17);
        cfg.max_epochs = 2;
        cfg.batch_size = 32;
        cfg.patience = 1;
        let logger = Logger::new(LogFormat::Text);
        run_arch_study(Architecture::Lr, &data, &cfg, &logger).unwrap()
    }

    #[test]
    fn study_trials_are_worker_count_invariant() {
        let solo = tiny_study(1);
        let pooled = tiny_study(3);
        assert_eq!(solo.len(), 3);
        for (a, b) in solo.iter().zip(&pooled) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.point, b.point);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.valid_auroc.to_bits(), b.valid_auroc.to_bits());
            assert_eq!(a.test_auroc.to_bits(), b.test_auroc.to_bits());
            assert_eq!(a.status, b.status);
        }
    }
}
