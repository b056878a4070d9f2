//! On-disk formats: cohorts, encounters, model checkpoints, trial ledgers,
//! and training histories.
//!
//! Every format is line-oriented JSON or CSV written through serde, with a
//! versioned schema tag where a file is expected to outlive a single run.
//! Writers emit map keys in sorted order and struct fields in declaration
//! order, so the same inputs always produce byte-identical files.

pub mod checkpoint;
pub mod cohort;
pub mod encounters;
pub mod history;
pub mod ledger;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Opens a buffered line reader, mapping the failure to the path.
fn open_lines(path: &Path) -> Result<std::io::Lines<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file).lines())
}

/// Writes a fully assembled byte string atomically enough for our purposes:
/// create + write + flush, mapping every failure to the path.
fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(bytes).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}
