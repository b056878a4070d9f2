//! Padded batching of visit sequences.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{PatientRecord, Vocabulary};
use crate::error::{Error, Result};

/// One padded mini-batch.
///
/// Layouts are row-major: `code_ids` and `code_mask` are [B×T×Cmax],
/// `visit_mask` and `delta_days` are [B×T]. PAD id 0 fills every unused
/// code slot; masks hold 1.0 at real entries and 0.0 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub size: usize,
    pub steps: usize,
    pub max_codes: usize,
    pub code_ids: Vec<u32>,
    pub code_mask: Vec<f64>,
    pub visit_mask: Vec<f64>,
    pub delta_days: Vec<f64>,
    pub labels: Vec<f64>,
}

impl Batch {
    /// The real codes of visit `t` of row `b` (empty for padded visits).
    pub fn codes_at(&self, b: usize, t: usize) -> &[u32] {
        let base = (b * self.steps + t) * self.max_codes;
        let row = &self.code_ids[base..base + self.max_codes];
        let n = self.code_mask[base..base + self.max_codes]
            .iter()
            .take_while(|&&m| m != 0.0)
            .count();
        &row[..n]
    }

    /// Index of the last real visit of row `b`; rows always have one.
    pub fn last_real_index(&self, b: usize) -> usize {
        let row = &self.visit_mask[b * self.steps..(b + 1) * self.steps];
        row.iter().rposition(|&m| m != 0.0).expect("every row has at least one visit")
    }

    pub fn delta_at(&self, b: usize, t: usize) -> f64 {
        self.delta_days[b * self.steps + t]
    }

    pub fn is_real(&self, b: usize, t: usize) -> bool {
        self.visit_mask[b * self.steps + t] != 0.0
    }
}

/// Chunks records into consecutive batches of at most `batch_size`, padding
/// each batch to its own max visit count and max codes per visit.
pub fn batch_visits(records: &[PatientRecord], batch_size: usize) -> Result<Vec<Batch>> {
    let refs: Vec<&PatientRecord> = records.iter().collect();
    batch_visit_refs(&refs, batch_size)
}

/// Like [`batch_visits`] but over borrowed records, so callers can batch a
/// shuffled view without cloning.
pub fn batch_visit_refs(records: &[&PatientRecord], batch_size: usize) -> Result<Vec<Batch>> {
    if batch_size == 0 {
        return Err(Error::Invalid("batch_visits: batch_size must be positive".into()));
    }
    records
        .chunks(batch_size)
        .map(build_batch)
        .collect()
}

fn build_batch(chunk: &[&PatientRecord]) -> Result<Batch> {
    let size = chunk.len();
    let steps = chunk.iter().map(|r| r.visits.len()).max().unwrap_or(0);
    let max_codes = chunk
        .iter()
        .flat_map(|r| r.visits.iter().map(|v| v.codes.len()))
        .max()
        .unwrap_or(0)
        .max(1);
    if steps == 0 {
        return Err(Error::Invalid("batch_visits: a record has no visits".into()));
    }

    let mut batch = Batch {
        size,
        steps,
        max_codes,
        code_ids: vec![Vocabulary::PAD; size * steps * max_codes],
        code_mask: vec![0.0; size * steps * max_codes],
        visit_mask: vec![0.0; size * steps],
        delta_days: vec![0.0; size * steps],
        labels: Vec::with_capacity(size),
    };
    for (b, record) in chunk.iter().enumerate() {
        if record.visits.is_empty() {
            return Err(Error::Invalid(alloc::format!(
                "batch_visits: patient {} has no visits",
                record.patient_id
            )));
        }
        batch.labels.push(f64::from(record.label));
        for (t, visit) in record.visits.iter().enumerate() {
            batch.visit_mask[b * steps + t] = 1.0;
            batch.delta_days[b * steps + t] = f64::from(visit.delta_days);
            let base = (b * steps + t) * max_codes;
            for (k, &code) in visit.codes.iter().enumerate() {
                batch.code_ids[base + k] = code;
                batch.code_mask[base + k] = 1.0;
            }
        }
    }
    Ok(batch)
}
