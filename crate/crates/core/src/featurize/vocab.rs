use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::FeaturizeError;
use crate::preprocess::TokenSequence;

/// Terms retained from a training corpus with their document frequencies.
///
/// Column indices follow lexicographic term order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "RawVocabulary", into = "RawVocabulary")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    term_index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawVocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

impl From<RawVocabulary> for Vocabulary {
    fn from(raw: RawVocabulary) -> Self {
        let term_index = raw
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            terms: raw.terms,
            doc_freq: raw.doc_freq,
            n_docs: raw.n_docs,
            term_index,
        }
    }
}

impl From<Vocabulary> for RawVocabulary {
    fn from(v: Vocabulary) -> Self {
        RawVocabulary {
            terms: v.terms,
            doc_freq: v.doc_freq,
            n_docs: v.n_docs,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.doc_freq == other.doc_freq && self.n_docs == other.n_docs
    }
}

impl Vocabulary {
    pub(crate) fn validate(&self) -> Result<(), FeaturizeError> {
        let ok = self.terms.len() == self.doc_freq.len()
            && self.terms.windows(2).all(|w| w[0] < w[1])
            && self
                .doc_freq
                .iter()
                .all(|&df| 1 <= df && df <= self.n_docs);
        if ok && !self.terms.is_empty() {
            Ok(())
        } else {
            Err(FeaturizeError::InvalidModel(
                "vocabulary terms must be sorted and unique with 1 <= doc_freq <= n_docs".into(),
            ))
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }
}

/// Retains terms occurring in at least `min_df` documents, optionally capped
/// to the `max_features` most frequent (ties broken lexicographically).
pub fn fit_vocabulary(
    train: &[TokenSequence],
    min_df: usize,
    max_features: Option<usize>,
) -> Result<Vocabulary, FeaturizeError> {
    if train.is_empty() {
        return Err(FeaturizeError::InvalidParameter("no training documents".into()));
    }
    if min_df == 0 || max_features == Some(0) {
        return Err(FeaturizeError::InvalidParameter(
            "min_df and max_features must be positive".into(),
        ));
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    for seq in train {
        let unique: HashSet<&str> = seq.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, n)| n >= min_df).collect();
    if let Some(cap) = max_features {
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        kept.truncate(cap);
    }
    if kept.is_empty() {
        return Err(FeaturizeError::EmptyVocabulary);
    }
    kept.sort_by(|a, b| a.0.cmp(b.0));
    Ok(RawVocabulary {
        terms: kept.iter().map(|(t, _)| t.to_string()).collect(),
        doc_freq: kept.iter().map(|&(_, n)| n).collect(),
        n_docs: train.len(),
    }
    .into())
}
