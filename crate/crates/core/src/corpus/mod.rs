//! Labeled text datasets: loading, cleaning, stratified partitioning and
//! synthetic corpus generation.
//!
//! Class indices everywhere in the crate follow the lexicographic order of
//! label strings held by [`Dataset::labels`].

mod io;
mod split;
mod synth;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_dataset, read_dataset, write_dataset, DatasetFormat, LoadedDataset};
pub use split::{stratified_split, DatasetSplits, SplitSpec, SplitSummary};
pub use synth::{synth_corpus, SynthConfig, SynthCorpus};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("no records")]
    NoRecords,
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("dataset is empty after cleaning (min_per_class = {0})")]
    EmptyAfterCleaning(usize),
    #[error("invalid split spec: {0}")]
    InvalidSpec(String),
    #[error("class {label:?} has {count} documents; too small to appear in train, validation and test")]
    ClassTooSmall { label: String, count: usize },
    #[error("invalid synthetic corpus parameters: {0}")]
    InvalidSynth(String),
}

/// One labeled text record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label: label.into(),
        }
    }
}

/// An ordered collection of documents plus its canonical (sorted) label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    documents: Vec<Document>,
    labels: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, collecting and sorting the label set. Ids must be unique.
    pub fn new(documents: Vec<Document>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(CorpusError::DuplicateId(doc.id.clone()));
            }
        }
        let labels = documents
            .iter()
            .map(|d| d.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Self { documents, labels })
    }

    /// Same as [`Dataset::new`] but keeps a wider, externally fixed label set
    /// (used so that splits share the parent's class indexing).
    pub(crate) fn with_labels(documents: Vec<Document>, labels: Vec<String>) -> Self {
        debug_assert!(documents
            .iter()
            .all(|d| labels.binary_search(&d.label).is_ok()));
        Self { documents, labels }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    /// Class index of every document, in document order.
    pub fn class_indices(&self) -> Vec<usize> {
        self.documents
            .iter()
            .map(|d| self.label_index(&d.label).expect("label set covers documents"))
            .collect()
    }

    /// Number of documents per label.
    pub fn class_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts: BTreeMap<&str, usize> =
            self.labels.iter().map(|l| (l.as_str(), 0)).collect();
        for d in &self.documents {
            *counts.entry(d.label.as_str()).or_default() += 1;
        }
        counts
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }
}

/// Drops every document whose class has fewer than `min_per_class` members.
pub fn clean_dataset(dataset: &Dataset, min_per_class: usize) -> Result<Dataset, CorpusError> {
    if min_per_class == 0 {
        return Err(CorpusError::InvalidSpec("min_per_class must be >= 1".into()));
    }
    let counts = dataset.class_counts();
    let kept: Vec<Document> = dataset
        .documents
        .iter()
        .filter(|d| counts[d.label.as_str()] >= min_per_class)
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(CorpusError::EmptyAfterCleaning(min_per_class));
    }
    Dataset::new(kept)
}
