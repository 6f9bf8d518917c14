//! TF-IDF weighting with raw term-frequency ratios and an unsmoothed
//! base-10 IDF:
//!
//! ```text
//! tfidf(t, d) = (n_td / n_d) * log10(N / N_t)
//! ```
//!
//! `n_d` counts only in-vocabulary tokens of `d`. A term present in every
//! training document has IDF 0 and never produces an entry, unlike the
//! smoothed variants most libraries default to. Vectors are not normalized.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{fit_vocabulary, FeatureVector, FeaturizeError, SparseVector, TokenFeaturizer, Vocabulary};
use crate::preprocess::{Lexicon, PreprocessConfig, Preprocessor, TokenSequence};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTfidf", into = "RawTfidf")]
pub struct TfidfModel {
    vocabulary: Vocabulary,
    preprocessor: Preprocessor,
    idf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTfidf {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    config: PreprocessConfig,
    lexicon: Lexicon,
}

impl TryFrom<RawTfidf> for TfidfModel {
    type Error = FeaturizeError;

    fn try_from(raw: RawTfidf) -> Result<Self, FeaturizeError> {
        let vocabulary: Vocabulary = serde_json::from_value(serde_json::json!({
            "terms": raw.terms,
            "doc_freq": raw.doc_freq,
            "n_docs": raw.n_docs,
        }))
        .map_err(|e| FeaturizeError::InvalidModel(e.to_string()))?;
        vocabulary.validate()?;
        let preprocessor = Preprocessor::new(raw.config, raw.lexicon)?;
        Ok(Self::from_parts(vocabulary, preprocessor))
    }
}

impl From<TfidfModel> for RawTfidf {
    fn from(m: TfidfModel) -> Self {
        RawTfidf {
            terms: m.vocabulary.terms().to_vec(),
            doc_freq: m.vocabulary.doc_freq().to_vec(),
            n_docs: m.vocabulary.n_docs(),
            config: m.preprocessor.config,
            lexicon: m.preprocessor.lexicon,
        }
    }
}

impl TfidfModel {
    pub fn from_parts(vocabulary: Vocabulary, preprocessor: Preprocessor) -> Self {
        let n = vocabulary.n_docs() as f64;
        let idf = vocabulary
            .doc_freq()
            .iter()
            .map(|&df| if df == vocabulary.n_docs() { 0.0 } else { (n / df as f64).log10() })
            .collect();
        Self {
            vocabulary,
            preprocessor,
            idf,
        }
    }

    /// Preprocesses `texts` and fits the vocabulary on them.
    pub fn fit<S: AsRef<str>>(
        texts: &[S],
        preprocessor: Preprocessor,
        min_df: usize,
        max_features: Option<usize>,
    ) -> Result<Self, FeaturizeError> {
        let seqs: Vec<TokenSequence> = texts.iter().map(|t| preprocessor.process(t.as_ref())).collect();
        let vocabulary = fit_vocabulary(&seqs, min_df, max_features)?;
        Ok(Self::from_parts(vocabulary, preprocessor))
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn preprocessor(&self) -> &Preprocessor {
        &self.preprocessor
    }

    pub fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    /// Weights an already n-grammed token sequence.
    pub fn transform<T: Scalar, S: AsRef<str>>(&self, seq: &[S]) -> SparseVector<T> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        let mut n_d = 0usize;
        for t in seq {
            if let Some(i) = self.vocabulary.index(t.as_ref()) {
                *counts.entry(i).or_default() += 1;
                n_d += 1;
            }
        }
        let entries = counts
            .into_iter()
            .filter(|&(i, _)| self.idf[i] != 0.0)
            .map(|(i, n_td)| (i, T::lit(n_td as f64 / n_d as f64 * self.idf[i])))
            .collect();
        SparseVector::from_pairs(self.dimension(), entries)
    }

    pub fn transform_text<T: Scalar>(&self, text: &str) -> SparseVector<T> {
        self.transform(&self.preprocessor.process(text))
    }
}

impl<T: Scalar> TokenFeaturizer<T> for TfidfModel {
    fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    fn tokens(&self, text: &str) -> TokenSequence {
        self.preprocessor.unigrams(text)
    }

    fn encode(&self, unigrams: &[&str]) -> FeatureVector<T> {
        FeatureVector::Sparse(self.transform(&self.preprocessor.expand(unigrams)))
    }
}
