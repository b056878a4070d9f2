//! Patient-sequence data model, synthetic cohorts, labeling, splitting,
//! and batching.

mod batch;
mod generate;
mod labels;
mod split;

pub use batch::{batch_visit_refs, batch_visits, Batch};
pub use generate::{generate_cohort, generate_cohort_with_risk, GeneratorSpec};
pub use labels::{build_readmission_labels, records_from_encounters, PatientLabel, ReadmissionOutcome};
pub use split::{split_cohort, SplitResult};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One clinical encounter's worth of codes plus the days elapsed since the
/// previous visit (0 for the first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Visit {
    pub delta_days: u32,
    pub codes: Vec<u32>,
}

/// One patient: binary label plus the ordered visit sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatientRecord {
    pub patient_id: String,
    pub label: u8,
    pub visits: Vec<Visit>,
}

impl PatientRecord {
    pub fn validate(&self, vocab_ids: usize) -> Result<()> {
        if self.label > 1 {
            return Err(Error::Invalid(format!(
                "patient {}: label {} is not binary",
                self.patient_id, self.label
            )));
        }
        if self.visits.is_empty() {
            return Err(Error::Invalid(format!("patient {}: no visits", self.patient_id)));
        }
        for (i, visit) in self.visits.iter().enumerate() {
            for &code in &visit.codes {
                if code == 0 || code as usize >= vocab_ids {
                    return Err(Error::Invalid(format!(
                        "patient {}: visit {i} code {code} outside vocabulary (1..{})",
                        self.patient_id,
                        vocab_ids - 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Code-string to id map. Id 0 is reserved for padding and never maps to a
/// code; real ids are dense in 1..=len.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    code_to_id: BTreeMap<String, u32>,
}

impl Vocabulary {
    pub const PAD: u32 = 0;

    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from an existing map, validating density and the PAD reservation.
    pub fn from_map(code_to_id: BTreeMap<String, u32>) -> Result<Self> {
        let n = code_to_id.len() as u32;
        let mut seen = alloc::vec![false; n as usize + 1];
        for (code, &id) in &code_to_id {
            if id == Self::PAD {
                return Err(Error::Invalid(format!("code {code:?} claims the PAD id 0")));
            }
            if id > n {
                return Err(Error::Invalid(format!(
                    "code {code:?} has id {id}, outside dense range 1..={n}"
                )));
            }
            if seen[id as usize] {
                return Err(Error::Invalid(format!("id {id} assigned to more than one code")));
            }
            seen[id as usize] = true;
        }
        Ok(Vocabulary { code_to_id })
    }

    /// Adds a code, assigning the next id; returns the id either way.
    pub fn intern(&mut self, code: &str) -> u32 {
        if let Some(&id) = self.code_to_id.get(code) {
            return id;
        }
        let id = self.code_to_id.len() as u32 + 1;
        self.code_to_id.insert(String::from(code), id);
        id
    }

    pub fn id_of(&self, code: &str) -> Option<u32> {
        self.code_to_id.get(code).copied()
    }

    /// Number of distinct real codes (excluding PAD).
    pub fn n_codes(&self) -> usize {
        self.code_to_id.len()
    }

    /// Number of ids including PAD; embedding tables size rows by this.
    pub fn n_ids(&self) -> usize {
        self.code_to_id.len() + 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.code_to_id.iter().map(|(code, &id)| (code.as_str(), id))
    }

    pub fn as_map(&self) -> &BTreeMap<String, u32> {
        &self.code_to_id
    }
}

/// Encounter kind as supplied by the data producer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncounterKind {
    Inpatient,
    Transfer,
    Recurring,
    Other,
}

impl EncounterKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EncounterKind::Inpatient => "inpatient",
            EncounterKind::Transfer => "transfer",
            EncounterKind::Recurring => "recurring",
            EncounterKind::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "inpatient" => Ok(EncounterKind::Inpatient),
            "transfer" => Ok(EncounterKind::Transfer),
            "recurring" => Ok(EncounterKind::Recurring),
            "other" => Ok(EncounterKind::Other),
            _ => Err(Error::Invalid(format!("unknown encounter kind {s:?}"))),
        }
    }
}

/// Raw encounter row used by readmission labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encounter {
    pub patient_id: String,
    pub admit_day: i64,
    pub discharge_day: i64,
    pub kind: EncounterKind,
    pub codes: Vec<u32>,
}
