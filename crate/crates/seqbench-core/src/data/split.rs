//! Stratified train/valid/test splitting.

use alloc::vec::Vec;

use crate::data::PatientRecord;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Output of [`split_cohort`]. `stratified` is false when a label class was
/// too small and the split fell back to unstratified shuffling.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: Vec<PatientRecord>,
    pub valid: Vec<PatientRecord>,
    pub test: Vec<PatientRecord>,
    pub stratified: bool,
}

/// Splits records by label class with deterministic shuffling.
///
/// Within each class the valid and test counts are floor(n·ratio); the
/// remainder goes to train. Classes with fewer than 3 members force an
/// unstratified fallback over the whole cohort, flagged in the result.
pub fn split_cohort(
    records: &[PatientRecord],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<SplitResult> {
    let (r_train, r_valid, r_test) = ratios;
    if r_train <= 0.0 || r_valid <= 0.0 || r_test <= 0.0 {
        return Err(Error::Invalid("split_cohort: ratios must be positive".into()));
    }
    let total = r_train + r_valid + r_test;
    if !((total - 1.0).abs() < 1e-9) {
        return Err(Error::Invalid(alloc::format!(
            "split_cohort: ratios sum to {total}, expected 1"
        )));
    }
    if records.len() < 10 {
        return Err(Error::Invalid(alloc::format!(
            "split_cohort: need at least 10 records, got {}",
            records.len()
        )));
    }

    let root = Rng::new(seed);
    let positives: Vec<usize> =
        records.iter().enumerate().filter(|(_, r)| r.label == 1).map(|(i, _)| i).collect();
    let negatives: Vec<usize> =
        records.iter().enumerate().filter(|(_, r)| r.label == 0).map(|(i, _)| i).collect();

    let stratified = positives.len() >= 3 && negatives.len() >= 3;
    let groups: Vec<(Vec<usize>, u64)> = if stratified {
        alloc::vec![(negatives, 0), (positives, 1)]
    } else {
        alloc::vec![((0..records.len()).collect(), 2)]
    };

    let mut assign = alloc::vec![0u8; records.len()];
    for (mut indices, stream_key) in groups {
        let mut rng = root.stream("split-class", stream_key);
        rng.shuffle(&mut indices);
        let n = indices.len();
        let n_valid = (n as f64 * r_valid) as usize;
        let n_test = (n as f64 * r_test) as usize;
        let n_train = n - n_valid - n_test;
        for (pos, &idx) in indices.iter().enumerate() {
            assign[idx] = if pos < n_train {
                0
            } else if pos < n_train + n_valid {
                1
            } else {
                2
            };
        }
    }

    let mut result = SplitResult {
        train: Vec::new(),
        valid: Vec::new(),
        test: Vec::new(),
        stratified,
    };
    for (record, &slot) in records.iter().zip(&assign) {
        let target = match slot {
            0 => &mut result.train,
            1 => &mut result.valid,
            _ => &mut result.test,
        };
        target.push(record.clone());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Visit;
    use alloc::collections::BTreeSet;
    use alloc::string::String;

    fn cohort(n: usize, positive_every: usize) -> Vec<PatientRecord> {
        (0..n)
            .map(|i| PatientRecord {
                patient_id: alloc::format!("p{i}"),
                label: u8::from(i % positive_every == 0),
                visits: alloc::vec![Visit { delta_days: 0, codes: alloc::vec![1] }],
            })
            .collect()
    }

    fn ids(records: &[PatientRecord]) -> BTreeSet<String> {
        records.iter().map(|r| r.patient_id.clone()).collect()
    }

    #[test]
    fn balanced_hundred_splits_70_10_20() {
        let records = cohort(100, 2);
        let split = split_cohort(&records, (0.7, 0.1, 0.2), 5).unwrap();
        assert!(split.stratified);
        assert_eq!(split.train.len(), 70);
        assert_eq!(split.valid.len(), 10);
        assert_eq!(split.test.len(), 20);
    }

    #[test]
    fn partition_holds_for_many_seeds() {
        let records = cohort(53, 3);
        for seed in 0..20 {
            let split = split_cohort(&records, (0.7, 0.1, 0.2), seed).unwrap();
            let train = ids(&split.train);
            let valid = ids(&split.valid);
            let test = ids(&split.test);
            assert!(train.is_disjoint(&valid));
            assert!(train.is_disjoint(&test));
            assert!(valid.is_disjoint(&test));
            let mut union = train;
            union.extend(valid);
            union.extend(test);
            assert_eq!(union, ids(&records));
        }
    }

    #[test]
    fn per_class_proportions_track_global() {
        let records = cohort(200, 2);
        let split = split_cohort(&records, (0.7, 0.1, 0.2), 11).unwrap();
        let count = |set: &[PatientRecord], label: u8| {
            set.iter().filter(|r| r.label == label).count() as isize
        };
        // 100 per class: expect 70/10/20 per class, within one member.
        for label in [0u8, 1u8] {
            assert!((count(&split.train, label) - 70).abs() <= 1);
            assert!((count(&split.valid, label) - 10).abs() <= 1);
            assert!((count(&split.test, label) - 20).abs() <= 1);
        }
    }

    #[test]
    fn tiny_class_falls_back_to_unstratified() {
        let mut records = cohort(40, 1000);
        records[0].label = 1;
        records[1].label = 1;
        let split = split_cohort(&records, (0.7, 0.1, 0.2), 3).unwrap();
        assert!(!split.stratified);
        let total = split.train.len() + split.valid.len() + split.test.len();
        assert_eq!(total, 40);
    }

    #[test]
    fn same_seed_reproduces_split() {
        let records = cohort(60, 4);
        let a = split_cohort(&records, (0.7, 0.1, 0.2), 9).unwrap();
        let b = split_cohort(&records, (0.7, 0.1, 0.2), 9).unwrap();
        assert_eq!(ids(&a.train), ids(&b.train));
        assert_eq!(ids(&a.valid), ids(&b.valid));
        assert_eq!(ids(&a.test), ids(&b.test));
    }

    #[test]
    fn rejects_bad_inputs() {
        let records = cohort(5, 2);
        assert!(split_cohort(&records, (0.7, 0.1, 0.2), 1).is_err());
        let records = cohort(20, 2);
        assert!(split_cohort(&records, (0.8, 0.1, 0.2), 1).is_err());
        assert!(split_cohort(&records, (0.9, 0.1, 0.0), 1).is_err());
    }
}
