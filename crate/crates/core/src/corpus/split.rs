use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset, Document};

/// Parameters of the two-level stratified split: a test hold-out first, then
/// a validation share of what remains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub val_fraction_of_train: f64,
    pub seed: u64,
    pub min_per_class: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.25,
            val_fraction_of_train: 0.15,
            seed: 0,
            min_per_class: 9,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, f) in [
            ("test_fraction", self.test_fraction),
            ("val_fraction_of_train", self.val_fraction_of_train),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(CorpusError::InvalidSpec(format!(
                    "{name} must lie strictly between 0 and 1, got {f}"
                )));
            }
        }
        if self.min_per_class == 0 {
            return Err(CorpusError::InvalidSpec("min_per_class must be >= 1".into()));
        }
        Ok(())
    }

    /// Per-class (train, validation, test) sizes for a class of `n` documents.
    pub fn class_counts(&self, n: usize) -> (usize, usize, usize) {
        let test = round_half_up(n as f64 * self.test_fraction).min(n);
        let rest = n - test;
        let val = round_half_up(rest as f64 * self.val_fraction_of_train).min(rest);
        (rest - val, val, test)
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplits {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// JSON summary written next to the split files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub test_fraction: f64,
    pub val_fraction_of_train: f64,
    pub min_per_class: usize,
    pub per_class: BTreeMap<String, SplitCounts>,
    pub totals: SplitCounts,
}

impl DatasetSplits {
    pub fn summary(&self, spec: &SplitSpec) -> SplitSummary {
        let mut per_class: BTreeMap<String, SplitCounts> = BTreeMap::new();
        for label in self.train.labels() {
            per_class.insert(
                label.clone(),
                SplitCounts {
                    train: 0,
                    validation: 0,
                    test: 0,
                },
            );
        }
        for (ds, pick) in [
            (&self.train, 0usize),
            (&self.validation, 1),
            (&self.test, 2),
        ] {
            for d in ds.documents() {
                let c = per_class.entry(d.label.clone()).or_insert(SplitCounts {
                    train: 0,
                    validation: 0,
                    test: 0,
                });
                match pick {
                    0 => c.train += 1,
                    1 => c.validation += 1,
                    _ => c.test += 1,
                }
            }
        }
        SplitSummary {
            seed: spec.seed,
            test_fraction: spec.test_fraction,
            val_fraction_of_train: spec.val_fraction_of_train,
            min_per_class: spec.min_per_class,
            per_class,
            totals: SplitCounts {
                train: self.train.len(),
                validation: self.validation.len(),
                test: self.test.len(),
            },
        }
    }
}

/// Splits `dataset` into train/validation/test with per-class proportions
/// preserved to within one document. Each split keeps the input's document
/// order and the parent's label set.
pub fn stratified_split(dataset: &Dataset, spec: &SplitSpec) -> Result<DatasetSplits, CorpusError> {
    spec.validate()?;
    let classes = dataset.class_indices();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); dataset.labels().len()];
    for (i, &c) in classes.iter().enumerate() {
        members[c].push(i);
    }

    // 0 = train, 1 = validation, 2 = test
    let mut assignment = vec![0u8; dataset.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for (c, idx) in members.iter_mut().enumerate() {
        let n = idx.len();
        let (train, val, test) = spec.class_counts(n);
        if n < spec.min_per_class || train == 0 || val == 0 || test == 0 {
            return Err(CorpusError::ClassTooSmall {
                label: dataset.labels()[c].clone(),
                count: n,
            });
        }
        idx.shuffle(&mut rng);
        for &i in &idx[..test] {
            assignment[i] = 2;
        }
        for &i in &idx[test..test + val] {
            assignment[i] = 1;
        }
    }

    let mut parts: [Vec<Document>; 3] = Default::default();
    for (doc, &a) in dataset.documents().iter().zip(&assignment) {
        parts[a as usize].push(doc.clone());
    }
    let [train, validation, test] = parts;
    let labels = dataset.labels().to_vec();
    Ok(DatasetSplits {
        train: Dataset::with_labels(train, labels.clone()),
        validation: Dataset::with_labels(validation, labels.clone()),
        test: Dataset::with_labels(test, labels),
    })
}
