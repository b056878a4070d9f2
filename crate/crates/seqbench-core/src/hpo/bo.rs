//! Candidate-sampling Bayesian optimization step.

use alloc::vec::Vec;

use crate::error::Result;
use crate::rng::Rng;

use super::acquisition::expected_improvement;
use super::gp::fit_surrogate;
use super::space::{HyperPoint, SearchSpace};
use super::study::Trial;

/// Random trials before the surrogate takes over.
pub const WARMUP_TRIALS: usize = 10;
/// Acquisition candidates per suggestion.
pub const N_CANDIDATES: usize = 1000;
const XI: f64 = 0.01;

fn random_point(dims: usize, rng: &mut Rng) -> Vec<f64> {
    (0..dims).map(|_| rng.next_f64()).collect()
}

/// Proposes the next unit-cube point given (point, value) history: uniform
/// during warmup, then argmax of expected improvement over seeded uniform
/// candidates (ties resolve to the earliest candidate).
pub fn suggest_unit(
    history: &[(Vec<f64>, f64)],
    dims: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if history.len() < WARMUP_TRIALS {
        return Ok(random_point(dims, rng));
    }
    let points: Vec<Vec<f64>> = history.iter().map(|(p, _)| p.clone()).collect();
    let values: Vec<f64> = history.iter().map(|(_, v)| *v).collect();
    let surrogate = fit_surrogate(&points, &values)?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut top_point: Option<Vec<f64>> = None;
    let mut top_ei = f64::NEG_INFINITY;
    for _ in 0..N_CANDIDATES {
        let candidate = random_point(dims, rng);
        let (mu, sigma) = surrogate.predict(&candidate)?;
        let ei = expected_improvement(mu, sigma, best, XI);
        if ei > top_ei {
            top_ei = ei;
            top_point = Some(candidate);
        }
    }
    Ok(top_point.expect("candidate loop ran"))
}

/// Five-dimensional suggestion over the model search space, fed by a trial
/// ledger. Failed trials stay in the history (scored as observed, i.e. 0)
/// so the surrogate learns to avoid them.
pub fn suggest_next(
    trials: &[Trial],
    space: &SearchSpace,
    rng: &mut Rng,
) -> Result<(Vec<f64>, HyperPoint)> {
    let history: Vec<(Vec<f64>, f64)> =
        trials.iter().map(|t| (t.point.clone(), t.valid_auroc)).collect();
    let unit = suggest_unit(&history, SearchSpace::DIMS, rng)?;
    let hyper = space.decode(&unit);
    Ok((unit, hyper))
}
