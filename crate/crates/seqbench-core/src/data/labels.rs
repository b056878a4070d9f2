//! Readmission labeling over encounter histories.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{Encounter, EncounterKind, PatientRecord, Visit};
use crate::error::{Error, Result};

/// Labeling outcome for one patient. `index` points into the patient's
/// original encounter list at the inpatient stay whose discharge anchors the
/// readmission gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReadmissionOutcome {
    Case { index: usize },
    Control { index: usize },
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatientLabel {
    pub patient_id: String,
    pub outcome: ReadmissionOutcome,
}

/// Applies the readmission rules to per-patient encounter lists.
///
/// Only inpatient encounters qualify; transfer, recurring, and other kinds
/// are invisible to gap computation. The first consecutive qualifying pair
/// defines the index event: gap = second admit − first discharge. A gap
/// under 30 days is a case, over 90 days a control, anything in 30..=90 is
/// excluded, and so are patients with fewer than two inpatient stays.
pub fn build_readmission_labels(encounters: &[Encounter]) -> Result<Vec<PatientLabel>> {
    let mut labels = Vec::new();
    let mut start = 0;
    while start < encounters.len() {
        let pid = &encounters[start].patient_id;
        let mut end = start + 1;
        while end < encounters.len() && encounters[end].patient_id == *pid {
            end += 1;
        }
        labels.push(label_patient(pid, &encounters[start..end])?);
        start = end;
    }
    Ok(labels)
}

fn label_patient(patient_id: &str, rows: &[Encounter]) -> Result<PatientLabel> {
    let mut prev_admit = i64::MIN;
    for e in rows {
        if e.discharge_day < e.admit_day {
            return Err(Error::Invalid(format!(
                "patient {patient_id}: encounter discharges on day {} before admission on day {}",
                e.discharge_day, e.admit_day
            )));
        }
        if e.admit_day < prev_admit {
            return Err(Error::Invalid(format!(
                "patient {patient_id}: encounters not sorted by admit day"
            )));
        }
        prev_admit = e.admit_day;
    }

    let inpatient: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == EncounterKind::Inpatient)
        .map(|(i, _)| i)
        .collect();
    for pair in inpatient.windows(2) {
        let (a, b) = (&rows[pair[0]], &rows[pair[1]]);
        if b.admit_day < a.discharge_day {
            return Err(Error::Invalid(format!(
                "patient {patient_id}: overlapping inpatient stays (admit day {} before prior discharge day {})",
                b.admit_day, a.discharge_day
            )));
        }
    }

    let outcome = if inpatient.len() < 2 {
        ReadmissionOutcome::Excluded
    } else {
        let index = inpatient[0];
        let gap = rows[inpatient[1]].admit_day - rows[index].discharge_day;
        if gap < 30 {
            ReadmissionOutcome::Case { index }
        } else if gap > 90 {
            ReadmissionOutcome::Control { index }
        } else {
            ReadmissionOutcome::Excluded
        }
    };
    Ok(PatientLabel { patient_id: String::from(patient_id), outcome })
}

/// Turns labeled encounter histories into model-ready records.
///
/// The input sequence is every encounter (of any kind) admitted up to and
/// including the index discharge; exclusion of transfer/recurring encounters
/// applies only to gap qualification. Excluded patients produce no record.
pub fn records_from_encounters(encounters: &[Encounter]) -> Result<Vec<PatientRecord>> {
    let labels = build_readmission_labels(encounters)?;
    let mut records = Vec::new();
    let mut start = 0;
    for label in &labels {
        let mut end = start + 1;
        while end < encounters.len() && encounters[end].patient_id == label.patient_id {
            end += 1;
        }
        let rows = &encounters[start..end];
        start = end;

        let (label_value, index) = match label.outcome {
            ReadmissionOutcome::Case { index } => (1u8, index),
            ReadmissionOutcome::Control { index } => (0u8, index),
            ReadmissionOutcome::Excluded => continue,
        };
        let horizon = rows[index].discharge_day;
        let mut visits = Vec::new();
        let mut prev_admit = None;
        for e in rows.iter().filter(|e| e.admit_day <= horizon) {
            let delta = match prev_admit {
                None => 0,
                Some(day) => (e.admit_day - day) as u32,
            };
            prev_admit = Some(e.admit_day);
            visits.push(Visit { delta_days: delta, codes: e.codes.clone() });
        }
        records.push(PatientRecord {
            patient_id: label.patient_id.clone(),
            label: label_value,
            visits,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc(pid: &str, admit: i64, discharge: i64, kind: EncounterKind) -> Encounter {
        Encounter {
            patient_id: pid.into(),
            admit_day: admit,
            discharge_day: discharge,
            kind,
            codes: alloc::vec![1],
        }
    }

    fn outcome_of(encounters: &[Encounter]) -> ReadmissionOutcome {
        let labels = build_readmission_labels(encounters).unwrap();
        assert_eq!(labels.len(), 1);
        labels[0].outcome.clone()
    }

    #[test]
    fn gap_29_is_case() {
        let rows = [
            enc("p", 0, 5, EncounterKind::Inpatient),
            enc("p", 34, 40, EncounterKind::Inpatient),
        ];
        assert_eq!(outcome_of(&rows), ReadmissionOutcome::Case { index: 0 });
    }

    #[test]
    fn gap_91_is_control() {
        let rows = [
            enc("p", 0, 5, EncounterKind::Inpatient),
            enc("p", 96, 100, EncounterKind::Inpatient),
        ];
        assert_eq!(outcome_of(&rows), ReadmissionOutcome::Control { index: 0 });
    }

    #[test]
    fn gap_endpoints_are_excluded() {
        for gap in [30i64, 45, 90] {
            let rows = [
                enc("p", 0, 5, EncounterKind::Inpatient),
                enc("p", 5 + gap, 5 + gap + 3, EncounterKind::Inpatient),
            ];
            assert_eq!(outcome_of(&rows), ReadmissionOutcome::Excluded, "gap={gap}");
        }
    }

    #[test]
    fn transfer_between_stays_is_ignored() {
        // Inpatient discharge day 5, transfer at day 15, inpatient at day 100:
        // the gap is 95 days, a control, regardless of the transfer.
        let rows = [
            enc("p", 0, 5, EncounterKind::Inpatient),
            enc("p", 15, 16, EncounterKind::Transfer),
            enc("p", 100, 104, EncounterKind::Inpatient),
        ];
        assert_eq!(outcome_of(&rows), ReadmissionOutcome::Control { index: 0 });
    }

    #[test]
    fn never_readmitted_is_excluded() {
        let rows = [enc("p", 0, 5, EncounterKind::Inpatient)];
        assert_eq!(outcome_of(&rows), ReadmissionOutcome::Excluded);
        let rows = [
            enc("p", 0, 5, EncounterKind::Inpatient),
            enc("p", 50, 51, EncounterKind::Recurring),
        ];
        assert_eq!(outcome_of(&rows), ReadmissionOutcome::Excluded);
    }

    #[test]
    fn first_qualifying_pair_wins() {
        // Gaps: 10 (case) then 95; the first pair decides.
        let rows = [
            enc("p", 0, 5, EncounterKind::Inpatient),
            enc("p", 15, 20, EncounterKind::Inpatient),
            enc("p", 115, 120, EncounterKind::Inpatient),
        ];
        assert_eq!(outcome_of(&rows), ReadmissionOutcome::Case { index: 0 });
    }

    #[test]
    fn multiple_patients_are_labeled_independently() {
        let rows = [
            enc("a", 0, 5, EncounterKind::Inpatient),
            enc("a", 10, 12, EncounterKind::Inpatient),
            enc("b", 0, 2, EncounterKind::Inpatient),
            enc("b", 200, 201, EncounterKind::Inpatient),
        ];
        let labels = build_readmission_labels(&rows).unwrap();
        assert_eq!(labels.len(), 2);
        assert_eq!(labels[0].outcome, ReadmissionOutcome::Case { index: 0 });
        assert_eq!(labels[1].outcome, ReadmissionOutcome::Control { index: 0 });
    }

    #[test]
    fn unsorted_and_overlapping_inputs_error() {
        let rows = [
            enc("p", 10, 12, EncounterKind::Inpatient),
            enc("p", 0, 5, EncounterKind::Inpatient),
        ];
        assert!(build_readmission_labels(&rows).is_err());

        let rows = [
            enc("p", 0, 10, EncounterKind::Inpatient),
            enc("p", 5, 20, EncounterKind::Inpatient),
        ];
        assert!(build_readmission_labels(&rows).is_err());

        let rows = [enc("p", 5, 3, EncounterKind::Inpatient)];
        assert!(build_readmission_labels(&rows).is_err());
    }

    #[test]
    fn insertion_of_nonqualifying_encounters_never_changes_outcomes() {
        let mut rng = crate::rng::Rng::new(77);
        for _ in 0..200 {
            // Random base history of 2-4 inpatient stays.
            let n_stays = 2 + rng.below(3) as i64;
            let mut day = 0;
            let mut base = Vec::new();
            for _ in 0..n_stays {
                let stay = 1 + rng.below(5) as i64;
                base.push(enc("p", day, day + stay, EncounterKind::Inpatient));
                day += stay + 1 + rng.below(120) as i64;
            }
            let expected = outcome_of(&base);

            // Sprinkle transfers/recurring encounters at arbitrary days.
            let mut augmented = base.clone();
            for _ in 0..1 + rng.below(4) {
                let at = rng.below(day as u64 + 1) as i64;
                let kind = if rng.bernoulli(0.5) {
                    EncounterKind::Transfer
                } else {
                    EncounterKind::Recurring
                };
                augmented.push(enc("p", at, at, kind));
            }
            augmented.sort_by_key(|e| e.admit_day);
            assert_eq!(outcome_of(&augmented), expected_reindexed(&augmented, &expected));
        }
    }

    /// The outcome's index points into the encounter list, so inserting rows
    /// shifts it; map the expected index to the augmented list.
    fn expected_reindexed(augmented: &[Encounter], expected: &ReadmissionOutcome) -> ReadmissionOutcome {
        let first_inpatient = augmented
            .iter()
            .position(|e| e.kind == EncounterKind::Inpatient)
            .unwrap();
        match expected {
            ReadmissionOutcome::Case { .. } => ReadmissionOutcome::Case { index: first_inpatient },
            ReadmissionOutcome::Control { .. } => {
                ReadmissionOutcome::Control { index: first_inpatient }
            }
            ReadmissionOutcome::Excluded => ReadmissionOutcome::Excluded,
        }
    }

    #[test]
    fn records_cover_history_up_to_index_discharge() {
        let mut e1 = enc("p", 0, 5, EncounterKind::Inpatient);
        e1.codes = alloc::vec![1, 2];
        let mut t = enc("p", 2, 3, EncounterKind::Transfer);
        t.codes = alloc::vec![3];
        let mut e2 = enc("p", 15, 20, EncounterKind::Inpatient);
        e2.codes = alloc::vec![4];
        let rows = [e1, t, e2];
        let records = records_from_encounters(&rows).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.label, 1);
        // Index discharge is day 5: the transfer (admit day 2) is in history,
        // the readmission itself is not.
        assert_eq!(r.visits.len(), 2);
        assert_eq!(r.visits[0].codes, alloc::vec![1, 2]);
        assert_eq!(r.visits[1].codes, alloc::vec![3]);
        assert_eq!(r.visits[1].delta_days, 2);
    }

    #[test]
    fn excluded_patients_produce_no_record() {
        let rows = [
            enc("a", 0, 5, EncounterKind::Inpatient),
            enc("a", 40, 45, EncounterKind::Inpatient),
            enc("b", 0, 5, EncounterKind::Inpatient),
            enc("b", 10, 12, EncounterKind::Inpatient),
        ];
        let records = records_from_encounters(&rows).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].patient_id, "b");
    }
}
