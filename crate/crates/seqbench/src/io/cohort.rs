//! Cohort files: labeled visit sequences plus the code vocabulary.
//!
//! JSON Lines. Line 1 is a header `{"schema":"seqbench-cohort/1","vocab":
//! {code:id,...}}`; every following line is one patient
//! `{"id":...,"label":0|1,"visits":[{"dt":days,"codes":[ids...]},...]}`.
//! A header-only file is a valid empty cohort.

use std::collections::BTreeMap;
use std::path::Path;

use seqbench_core::data::{PatientRecord, Visit, Vocabulary};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COHORT_SCHEMA: &str = "seqbench-cohort/1";

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    vocab: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: String,
    label: u8,
    visits: Vec<VisitLine>,
}

#[derive(Serialize, Deserialize)]
struct VisitLine {
    dt: u32,
    codes: Vec<u32>,
}

/// Serializes a cohort. Records keep their given order; the vocabulary is
/// embedded in the header so the file is self-contained.
pub fn save_cohort(path: &Path, records: &[PatientRecord], vocab: &Vocabulary) -> Result<()> {
    let mut bytes = Vec::new();
    let header = Header { schema: COHORT_SCHEMA.into(), vocab: vocab.as_map().clone() };
    push_json_line(&mut bytes, &header);
    for record in records {
        let line = RecordLine {
            id: record.patient_id.clone(),
            label: record.label,
            visits: record
                .visits
                .iter()
                .map(|v| VisitLine { dt: v.delta_days, codes: v.codes.clone() })
                .collect(),
        };
        push_json_line(&mut bytes, &line);
    }
    super::write_all(path, &bytes)
}

fn push_json_line<T: Serialize>(bytes: &mut Vec<u8>, value: &T) {
    serde_json::to_writer(&mut *bytes, value).expect("in-memory JSON serialization");
    bytes.push(b'\n');
}

/// Loads a cohort, validating the schema tag, label range, and that every
/// code id is covered by the header vocabulary. Errors name the line.
pub fn load_cohort(path: &Path) -> Result<(Vec<PatientRecord>, Vocabulary)> {
    let mut lines = super::open_lines(path)?;
    let first = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::format(path, "empty file, expected a cohort header")),
    };
    let header: Header = serde_json::from_str(&first)
        .map_err(|e| Error::at_line(path, 1, format!("bad cohort header: {e}")))?;
    if header.schema != COHORT_SCHEMA {
        return Err(Error::at_line(
            path,
            1,
            format!("unknown schema {:?}, expected {COHORT_SCHEMA:?}", header.schema),
        ));
    }
    let vocab = Vocabulary::from_map(header.vocab)
        .map_err(|e| Error::at_line(path, 1, format!("bad vocabulary: {e}")))?;

    let mut records = Vec::new();
    for (offset, line) in lines.enumerate() {
        let lineno = offset + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        let parsed: RecordLine = serde_json::from_str(&line)
            .map_err(|e| Error::at_line(path, lineno, format!("bad patient record: {e}")))?;
        let record = PatientRecord {
            patient_id: parsed.id,
            label: parsed.label,
            visits: parsed
                .visits
                .into_iter()
                .map(|v| Visit { delta_days: v.dt, codes: v.codes })
                .collect(),
        };
        record
            .validate(vocab.n_ids())
            .map_err(|e| Error::at_line(path, lineno, e))?;
        records.push(record);
    }
    Ok((records, vocab))
}
