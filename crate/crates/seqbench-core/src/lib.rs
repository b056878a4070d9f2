//! Benchmark engine for clinical event prediction over longitudinal visit
//! sequences.
//!
//! The crate is organized around six subsystems:
//!
//! - [`tensor`] / [`tape`] / [`gradcheck`]: dense f64 tensors with
//!   reverse-mode autodiff and a finite-difference gradient checker,
//! - [`data`]: patient-sequence model, synthetic cohort generation with a
//!   planted order-sensitive signal, readmission labeling, stratified
//!   splitting, and padded batching,
//! - [`models`]: the recurrent model zoo (RNN/GRU/LSTM cells under standard,
//!   bidirectional, and dilated connections, plus QRNN, T-LSTM, RETAIN, and a
//!   bag-of-codes logistic regression),
//! - [`optim`]: seven first-order optimizers and the training loop with
//!   validation-AUROC early stopping,
//! - [`hpo`]: Gaussian-process Bayesian optimization over the hyperparameter
//!   space, with an append-only trial ledger,
//! - [`eval`]: AUROC, per-architecture model selection, and benchmark report
//!   rendering.
//!
//! The crate is `no_std` + `alloc`: all computation is pure and deterministic
//! given seeds. File formats, the CLI, wall-clock timing, and parallel trial
//! execution live in the companion `seqbench` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod hpo;
pub mod math;
pub mod models;
pub mod optim;
pub mod rng;
pub mod tape;
pub mod tensor;

pub use error::{Error, Result};
pub use rng::Rng;
pub use tape::{Tape, Var};
pub use tensor::Tensor;
