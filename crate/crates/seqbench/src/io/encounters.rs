//! Encounter files: the raw admit/discharge rows consumed by readmission
//! labeling. Plain JSON Lines, one encounter per line:
//! `{"patient_id":...,"admit_day":...,"discharge_day":...,"kind":...,
//! "codes":[...]}` with kind one of inpatient/transfer/recurring/other.

use std::path::Path;

use seqbench_core::data::{Encounter, EncounterKind};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct EncounterLine {
    patient_id: String,
    admit_day: i64,
    discharge_day: i64,
    kind: String,
    codes: Vec<u32>,
}

pub fn save_encounters(path: &Path, encounters: &[Encounter]) -> Result<()> {
    let mut bytes = Vec::new();
    for enc in encounters {
        let line = EncounterLine {
            patient_id: enc.patient_id.clone(),
            admit_day: enc.admit_day,
            discharge_day: enc.discharge_day,
            kind: enc.kind.as_str().into(),
            codes: enc.codes.clone(),
        };
        serde_json::to_writer(&mut bytes, &line).expect("in-memory JSON serialization");
        bytes.push(b'\n');
    }
    super::write_all(path, &bytes)
}

/// Loads an encounter file; errors name the offending line.
pub fn load_encounters(path: &Path) -> Result<Vec<Encounter>> {
    let mut encounters = Vec::new();
    for (offset, line) in super::open_lines(path)?.enumerate() {
        let lineno = offset + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: EncounterLine = serde_json::from_str(&line)
            .map_err(|e| Error::at_line(path, lineno, format!("bad encounter: {e}")))?;
        let kind = EncounterKind::parse(&parsed.kind)
            .map_err(|e| Error::at_line(path, lineno, e))?;
        encounters.push(Encounter {
            patient_id: parsed.patient_id,
            admit_day: parsed.admit_day,
            discharge_day: parsed.discharge_day,
            kind,
            codes: parsed.codes,
        });
    }
    Ok(encounters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Encounter> {
        vec![
            Encounter {
                patient_id: "p1".into(),
                admit_day: 0,
                discharge_day: 4,
                kind: EncounterKind::Inpatient,
                codes: vec![3, 8],
            },
            Encounter {
                patient_id: "p1".into(),
                admit_day: 33,
                discharge_day: 35,
                kind: EncounterKind::Other,
                codes: vec![2],
            },
        ]
    }

    #[test]
    fn roundtrip_preserves_encounters() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("enc.jsonl");
        save_encounters(&path, &sample()).unwrap();
        assert_eq!(load_encounters(&path).unwrap(), sample());
    }

    #[test]
    fn unknown_kind_errors_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("enc.jsonl");
        let text = "{\"patient_id\":\"p\",\"admit_day\":0,\"discharge_day\":1,\
                    \"kind\":\"icu\",\"codes\":[]}\n";
        std::fs::write(&path, text).unwrap();
        let err = load_encounters(&path).unwrap_err().to_string();
        assert!(err.contains("line 1") && err.contains("icu"), "{err}");
    }
}
