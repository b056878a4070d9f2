//! Trial ledgers: the append-style record a study leaves behind.
//!
//! JSON Lines. Line 1 is a header `{"schema":"seqbench-ledger/1","arch":...,
//! "task":...}`; each following line is one trial with its decoded
//! hyperparameters, seed, status, and metrics. Wall-clock time is
//! deliberately not persisted: the ledger must be byte-identical across
//! reruns of the same seed, and timing is the one field that never is.

use std::path::Path;

use seqbench_core::eval::Task;
use seqbench_core::hpo::{Trial, TrialStatus};
use seqbench_core::optim::Family;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LEDGER_SCHEMA: &str = "seqbench-ledger/1";

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    arch: String,
    task: String,
}

#[derive(Serialize, Deserialize)]
struct TrialLine {
    index: usize,
    optimizer: String,
    point: Vec<f64>,
    embed_dim: usize,
    hidden_size: usize,
    lr: f64,
    weight_decay: f64,
    eps: f64,
    seed: u64,
    valid_auroc: f64,
    test_auroc: f64,
    status: String,
}

fn status_str(status: TrialStatus) -> &'static str {
    match status {
        TrialStatus::Ok => "ok",
        TrialStatus::Failed => "failed",
    }
}

fn parse_status(s: &str) -> Option<TrialStatus> {
    match s {
        "ok" => Some(TrialStatus::Ok),
        "failed" => Some(TrialStatus::Failed),
        _ => None,
    }
}

pub fn save_ledger(path: &Path, arch: &str, task: Task, trials: &[Trial]) -> Result<()> {
    let mut bytes = Vec::new();
    let header =
        Header { schema: LEDGER_SCHEMA.into(), arch: arch.into(), task: task.as_str().into() };
    serde_json::to_writer(&mut bytes, &header).expect("in-memory JSON serialization");
    bytes.push(b'\n');
    for trial in trials {
        let line = TrialLine {
            index: trial.index,
            optimizer: trial.optimizer.as_str().into(),
            point: trial.point.clone(),
            embed_dim: trial.hyper.embed_dim,
            hidden_size: trial.hyper.hidden_size,
            lr: trial.hyper.lr,
            weight_decay: trial.hyper.weight_decay,
            eps: trial.hyper.eps,
            seed: trial.seed,
            valid_auroc: trial.valid_auroc,
            test_auroc: trial.test_auroc,
            status: status_str(trial.status).into(),
        };
        serde_json::to_writer(&mut bytes, &line).expect("in-memory JSON serialization");
        bytes.push(b'\n');
    }
    super::write_all(path, &bytes)
}

/// Loads a ledger back as (architecture name, task, trials). Wall time is
/// not stored, so it comes back as zero.
pub fn load_ledger(path: &Path) -> Result<(String, Task, Vec<Trial>)> {
    let mut lines = super::open_lines(path)?;
    let first = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::format(path, "empty file, expected a ledger header")),
    };
    let header: Header = serde_json::from_str(&first)
        .map_err(|e| Error::at_line(path, 1, format!("bad ledger header: {e}")))?;
    if header.schema != LEDGER_SCHEMA {
        return Err(Error::at_line(
            path,
            1,
            format!("unknown schema {:?}, expected {LEDGER_SCHEMA:?}", header.schema),
        ));
    }
    let task = Task::parse(&header.task).map_err(|e| Error::at_line(path, 1, e))?;

    let mut trials = Vec::new();
    for (offset, line) in lines.enumerate() {
        let lineno = offset + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        let parsed: TrialLine = serde_json::from_str(&line)
            .map_err(|e| Error::at_line(path, lineno, format!("bad trial: {e}")))?;
        let optimizer =
            Family::parse(&parsed.optimizer).map_err(|e| Error::at_line(path, lineno, e))?;
        let status = parse_status(&parsed.status).ok_or_else(|| {
            Error::at_line(path, lineno, format!("unknown trial status {:?}", parsed.status))
        })?;
        trials.push(Trial {
            index: parsed.index,
            optimizer,
            point: parsed.point,
            hyper: seqbench_core::hpo::HyperPoint {
                embed_dim: parsed.embed_dim,
                hidden_size: parsed.hidden_size,
                lr: parsed.lr,
                weight_decay: parsed.weight_decay,
                eps: parsed.eps,
            },
            seed: parsed.seed,
            valid_auroc: parsed.valid_auroc,
            test_auroc: parsed.test_auroc,
            wall_seconds: 0.0,
            status,
        });
    }
    Ok((header.arch, task, trials))
}
