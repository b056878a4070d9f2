//! Training history CSV: `epoch,train_loss,valid_auroc`, one row per epoch.
//! Floats are printed in Rust's shortest-roundtrip form.

use std::path::Path;

use seqbench_core::optim::EpochStats;

use crate::error::Result;

pub fn save_history(path: &Path, history: &[EpochStats]) -> Result<()> {
    let mut text = String::from("epoch,train_loss,valid_auroc\n");
    for row in history {
        text.push_str(&format!("{},{},{}\n", row.epoch, row.train_loss, row.valid_auroc));
    }
    super::write_all(path, text.as_bytes())
}
