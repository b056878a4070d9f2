//! Hyperparameter search: Gaussian-process surrogate, expected-improvement
//! acquisition, and the per-architecture study runner.

mod acquisition;
mod bo;
mod gp;
mod space;
mod study;

pub use acquisition::expected_improvement;
pub use bo::{suggest_next, suggest_unit, N_CANDIDATES, WARMUP_TRIALS};
pub use gp::{fit_surrogate, Surrogate};
pub use space::{HyperPoint, SearchSpace};
pub use study::{family_budgets, run_study, PlannedTrial, Trial, TrialOutcome, TrialStatus};
