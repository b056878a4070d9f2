//! Study runner: one search budget, split across optimizer families, with
//! suggestions drawn per family and evaluation delegated to the caller.
//!
//! The runner plans trials in rounds of up to `workers` at a time. Every
//! suggestion in a round is computed from the same completed-trial snapshot,
//! so a caller may evaluate the round's trials in parallel and the study
//! stays deterministic for a fixed worker count. Suggestion randomness comes
//! from per-trial streams of the study seed, which keeps the planned points
//! independent of evaluation timing altogether.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::optim::Family;
use crate::rng::Rng;

use super::bo::suggest_unit;
use super::space::{HyperPoint, SearchSpace};

/// Whether a trial's training run completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    Failed,
}

/// A scheduled trial, ready to evaluate.
#[derive(Debug, Clone)]
pub struct PlannedTrial {
    pub index: usize,
    pub optimizer: Family,
    /// Position in the unit hypercube the suggestion was drawn at.
    pub point: Vec<f64>,
    pub hyper: HyperPoint,
    /// Seed for the trial's own initialization and shuffling.
    pub seed: u64,
}

/// What the evaluator reports back for one planned trial.
///
/// A failed run should carry `status: Failed` with a floor score of 0 so the
/// surrogate steers away from that region instead of aborting the study.
#[derive(Debug, Clone, Copy)]
pub struct TrialOutcome {
    pub valid_auroc: f64,
    pub test_auroc: f64,
    pub wall_seconds: f64,
    pub status: TrialStatus,
}

/// A completed trial: the plan joined with its outcome.
#[derive(Debug, Clone)]
pub struct Trial {
    pub index: usize,
    pub optimizer: Family,
    pub point: Vec<f64>,
    pub hyper: HyperPoint,
    pub seed: u64,
    pub valid_auroc: f64,
    pub test_auroc: f64,
    pub wall_seconds: f64,
    pub status: TrialStatus,
}

/// Split `budget` evenly over the optimizer families, handing the remainder
/// to the earlier entries of [`Family::all`] one trial each.
pub fn family_budgets(budget: usize) -> Vec<(Family, usize)> {
    let families = Family::all();
    let base = budget / families.len();
    let extra = budget % families.len();
    families
        .iter()
        .enumerate()
        .map(|(i, &family)| (family, base + usize::from(i < extra)))
        .collect()
}

fn check_outcome(index: usize, outcome: &TrialOutcome) -> Result<()> {
    if !outcome.valid_auroc.is_finite() || !outcome.test_auroc.is_finite() {
        return Err(Error::NonFinite(format!("trial {index} reported a non-finite score")));
    }
    if !outcome.wall_seconds.is_finite() || outcome.wall_seconds < 0.0 {
        return Err(Error::Invalid(format!("trial {index} reported an invalid wall time")));
    }
    Ok(())
}

/// Run a full study of `budget` trials for one architecture.
///
/// `evaluate_round` receives at most `workers` planned trials and must return
/// one outcome per plan, in order. Failed trials are recorded and kept in the
/// suggestion history; only a malformed evaluator response aborts the study.
pub fn run_study<F>(
    budget: usize,
    workers: usize,
    root_seed: u64,
    mut evaluate_round: F,
) -> Result<Vec<Trial>>
where
    F: FnMut(&[PlannedTrial]) -> Vec<TrialOutcome>,
{
    if budget == 0 {
        return Err(Error::Invalid("study budget must be positive".into()));
    }
    if workers == 0 {
        return Err(Error::Invalid("worker count must be positive".into()));
    }
    let root = Rng::new(root_seed);
    let space = SearchSpace;
    let mut trials: Vec<Trial> = Vec::with_capacity(budget);
    let mut next_index = 0usize;
    for (family, count) in family_budgets(budget) {
        let mut done = 0usize;
        while done < count {
            let round = core::cmp::min(workers, count - done);
            let history: Vec<(Vec<f64>, f64)> = trials
                .iter()
                .filter(|t| t.optimizer == family)
                .map(|t| (t.point.clone(), t.valid_auroc))
                .collect();
            let mut planned = Vec::with_capacity(round);
            for _ in 0..round {
                let mut rng = root.stream("suggest", next_index as u64);
                let point = suggest_unit(&history, SearchSpace::DIMS, &mut rng)?;
                let hyper = space.decode(&point);
                let seed = root.stream("trial", next_index as u64).next_u64();
                planned.push(PlannedTrial {
                    index: next_index,
                    optimizer: family,
                    point,
                    hyper,
                    seed,
                });
                next_index += 1;
            }
            let outcomes = evaluate_round(&planned);
            if outcomes.len() != planned.len() {
                return Err(Error::Invalid(format!(
                    "evaluator returned {} outcomes for {} planned trials",
                    outcomes.len(),
                    planned.len(),
                )));
            }
            for (plan, outcome) in planned.into_iter().zip(outcomes) {
                check_outcome(plan.index, &outcome)?;
                trials.push(Trial {
                    index: plan.index,
                    optimizer: plan.optimizer,
                    point: plan.point,
                    hyper: plan.hyper,
                    seed: plan.seed,
                    valid_auroc: outcome.valid_auroc,
                    test_auroc: outcome.test_auroc,
                    wall_seconds: outcome.wall_seconds,
                    status: outcome.status,
                });
            }
            done += round;
        }
    }
    Ok(trials)
}
