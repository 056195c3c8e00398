//! Stratified 30/70 train/test split with a stratified 5-fold partition of
//! the train side for the ranking protocol.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::learners::stream_seed;
use crate::table::SampleSource;

pub const TRAIN_FRACTION: f64 = 0.30;
pub const PROTOCOL_FOLDS: usize = 5;
const MIN_TRAIN_PER_CLASS: usize = 5;

/// Row partition of a sample source: disjoint train/test sides plus
/// (rank, validation) folds whose validation sets partition the train side.
#[derive(Debug, Clone)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
}

impl SplitPlan {
    pub fn train_ids<S: SampleSource + ?Sized>(&self, source: &S) -> Vec<String> {
        self.train_rows
            .iter()
            .map(|&r| source.sample_id(r).to_string())
            .collect()
    }

    pub fn test_ids<S: SampleSource + ?Sized>(&self, source: &S) -> Vec<String> {
        self.test_rows
            .iter()
            .map(|&r| source.sample_id(r).to_string())
            .collect()
    }
}

fn rows_by_class<S: SampleSource + ?Sized>(
    source: &S,
    rows: &[usize],
) -> BTreeMap<u32, Vec<usize>> {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        groups.entry(source.label(r)).or_default().push(r);
    }
    groups
}

/// Deals each class's rows round-robin into `k` validation sets and pairs
/// them with the complementary rank sets.
pub fn stratified_folds<S: SampleSource + ?Sized>(
    source: &S,
    rows: &[usize],
    k: usize,
    seed: u64,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut validation: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (_, mut class_rows) in rows_by_class(source, rows) {
        class_rows.shuffle(&mut rng);
        for (i, r) in class_rows.into_iter().enumerate() {
            validation[i % k].push(r);
        }
    }
    validation
        .into_iter()
        .map(|mut val| {
            val.sort_unstable();
            let rank: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|r| val.binary_search(r).is_err())
                .collect();
            (rank, val)
        })
        .collect()
}

/// Stratified 30/70 split followed by a stratified 5-fold partition of the
/// train side. Deterministic given the seed and the source row order.
pub fn make_split<S: SampleSource + ?Sized>(source: &S, seed: u64) -> Result<SplitPlan> {
    let all: Vec<usize> = (0..source.len()).collect();
    let groups = rows_by_class(source, &all);
    if groups.is_empty() {
        return Err(Error::Data("cannot split an empty sample set".into()));
    }

    let mut offenders = Vec::new();
    for (&class, rows) in &groups {
        let train_count = (rows.len() as f64 * TRAIN_FRACTION).round() as usize;
        if train_count < MIN_TRAIN_PER_CLASS {
            offenders.push(format!(
                "class {class} ({} samples, {train_count} train)",
                rows.len()
            ));
        }
    }
    if !offenders.is_empty() {
        return Err(Error::Data(format!(
            "classes too small for a stratified 30/70 split with {PROTOCOL_FOLDS} folds: {}",
            offenders.join(", ")
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 0));
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for (_, mut rows) in groups {
        let train_count = (rows.len() as f64 * TRAIN_FRACTION).round() as usize;
        rows.shuffle(&mut rng);
        train_rows.extend_from_slice(&rows[..train_count]);
        test_rows.extend_from_slice(&rows[train_count..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();

    let folds = stratified_folds(source, &train_rows, PROTOCOL_FOLDS, stream_seed(seed, 1));
    Ok(SplitPlan {
        seed,
        train_rows,
        test_rows,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::FeatureTable;
    use ndarray::Array2;

    fn labeled_table(labels: Vec<u32>) -> FeatureTable {
        let n = labels.len();
        FeatureTable {
            values: Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64),
            feature_names: vec!["f0".into(), "f1".into()],
            labels,
            sample_ids: (0..n).map(|i| format!("s{i:05}")).collect(),
            image_ids: vec!["img".into(); n],
            dataset_tag: "test".into(),
        }
    }

    fn class_counts<S: SampleSource + ?Sized>(source: &S, rows: &[usize]) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for &r in rows {
            *counts.entry(source.label(r)).or_insert(0) += 1;
        }
        counts
    }

    #[test]
    fn balanced_two_class_thousand_sample_split() {
        let labels: Vec<u32> = (0..1000).map(|i| u32::from(i >= 500)).collect();
        let table = labeled_table(labels);
        let plan = make_split(&table, 7).unwrap();
        assert_eq!(plan.train_rows.len(), 300);
        assert_eq!(plan.test_rows.len(), 700);
        let train_counts = class_counts(&table, &plan.train_rows);
        assert_eq!(train_counts[&0], 150);
        assert_eq!(train_counts[&1], 150);
        assert_eq!(plan.folds.len(), 5);
        for (rank, val) in &plan.folds {
            assert_eq!(val.len(), 60);
            assert_eq!(rank.len(), 240);
        }
    }

    #[test]
    fn same_seed_reproduces_the_plan() {
        let labels: Vec<u32> = (0..200).map(|i| (i % 3) as u32).collect();
        let table = labeled_table(labels);
        let a = make_split(&table, 11).unwrap();
        let b = make_split(&table, 11).unwrap();
        assert_eq!(a.train_rows, b.train_rows);
        assert_eq!(a.test_rows, b.test_rows);
        assert_eq!(a.folds, b.folds);
    }

    #[test]
    fn train_and_test_partition_the_rows() {
        let labels: Vec<u32> = (0..157).map(|i| (i % 2) as u32).collect();
        let table = labeled_table(labels);
        let plan = make_split(&table, 3).unwrap();
        let mut all: Vec<usize> = plan
            .train_rows
            .iter()
            .chain(&plan.test_rows)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..157).collect::<Vec<_>>());
    }

    #[test]
    fn validation_folds_partition_the_train_side() {
        let labels: Vec<u32> = (0..300).map(|i| (i % 4) as u32).collect();
        let table = labeled_table(labels);
        let plan = make_split(&table, 19).unwrap();
        let mut covered: Vec<usize> = plan
            .folds
            .iter()
            .flat_map(|(_, val)| val.iter().copied())
            .collect();
        covered.sort_unstable();
        assert_eq!(covered, plan.train_rows);
        for (rank, val) in &plan.folds {
            assert!(val.iter().all(|r| rank.binary_search(r).is_err()));
            assert_eq!(rank.len() + val.len(), plan.train_rows.len());
        }
    }

    #[test]
    fn every_fold_rank_set_keeps_all_six_classes() {
        let mut labels = Vec::new();
        for (class, count) in [(0u32, 60), (1, 40), (2, 30), (3, 25), (4, 20), (5, 18)] {
            labels.extend(std::iter::repeat_n(class, count));
        }
        let table = labeled_table(labels);
        let plan = make_split(&table, 23).unwrap();
        for (rank, val) in &plan.folds {
            assert_eq!(class_counts(&table, rank).len(), 6);
            assert_eq!(class_counts(&table, val).len(), 6);
        }
    }

    #[test]
    fn stratification_stays_within_one_sample_of_the_fraction() {
        let mut labels = Vec::new();
        for (class, count) in [(0u32, 53), (1, 37), (2, 21)] {
            labels.extend(std::iter::repeat_n(class, count));
        }
        let table = labeled_table(labels);
        let plan = make_split(&table, 29).unwrap();
        let counts = class_counts(&table, &plan.train_rows);
        for (class, total) in [(0u32, 53usize), (1, 37), (2, 21)] {
            let want = total as f64 * TRAIN_FRACTION;
            assert!((counts[&class] as f64 - want).abs() <= 1.0);
        }
    }

    #[test]
    fn tiny_class_is_reported_by_id() {
        let mut labels: Vec<u32> = vec![0; 100];
        labels.extend(std::iter::repeat_n(5u32, 8));
        let table = labeled_table(labels);
        let err = make_split(&table, 1).unwrap_err();
        assert!(err.is_data_error());
        let message = err.to_string();
        assert!(message.contains("class 5"), "{message}");
        assert!(!message.contains("class 0"), "{message}");
    }
}
