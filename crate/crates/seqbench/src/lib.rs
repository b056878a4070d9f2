//! Everything around the `seqbench-core` engine that needs an operating
//! system: file formats, the command line, wall-clock timing, and parallel
//! trial execution.
//!
//! - [`io`]: cohort, encounter, checkpoint, ledger, and history files,
//! - [`config`]: flat `key = value` training configs,
//! - [`runner`]: study execution with a worker pool,
//! - [`cli`]: the `seqbench` binary's subcommands,
//! - [`logging`]: text or JSON progress lines on stderr.
//!
//! Output files are byte-deterministic given the same inputs and seeds; see
//! the module docs in [`io`] for how each format guarantees that.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod logging;
pub mod runner;

pub use error::{Error, Result};
