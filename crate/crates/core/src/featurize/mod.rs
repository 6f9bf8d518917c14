//! Token sequences to fixed-length numeric vectors.

mod doc2vec;
mod embedding;
mod precomputed;
mod sparse;
mod tfidf;
mod vocab;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::preprocess::{PreprocessError, TokenSequence};
use crate::scalar::Scalar;

pub use doc2vec::{train_doc2vec_dbow, Doc2VecEncoder, Doc2VecModel, Doc2VecParams};
pub use embedding::{
    average_embedding, load_embedding_table, read_embedding_table, EmbeddingTable, WordAverager,
};
pub use precomputed::{
    load_precomputed_embeddings, read_precomputed_embeddings, save_precomputed_embeddings,
    DocEmbeddingStore,
};
pub use sparse::{FeatureVector, SparseVector};
pub use tfidf::TfidfModel;
pub use vocab::{fit_vocabulary, Vocabulary};

#[derive(Debug, Error)]
pub enum FeaturizeError {
    #[error("vocabulary is empty after pruning")]
    EmptyVocabulary,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("empty embedding file")]
    EmptyFile,
    #[error("no embeddings")]
    NoEmbeddings,
    #[error("duplicate embedding id {0:?}")]
    DuplicateId(String),
    #[error("embedding {id:?} has {found} components, expected {expected}")]
    RaggedDimensions {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}

impl FeaturizeError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        FeaturizeError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

/// A fitted featurizer that works from text through unigram tokens.
///
/// Explanations remove unigram tokens and re-encode the survivors, so
/// `encode` must accept any subsequence of what `tokens` returns.
pub trait TokenFeaturizer<T: Scalar>: Send + Sync {
    fn dimension(&self) -> usize;

    /// Normalized unigram tokens of `text`.
    fn tokens(&self, text: &str) -> TokenSequence;

    fn encode(&self, unigrams: &[&str]) -> FeatureVector<T>;

    /// True when `encode` runs an optimization (Doc2Vec inference) rather
    /// than a lookup, which makes per-subset explanations slow.
    fn encode_is_expensive(&self) -> bool {
        false
    }

    fn featurize(&self, text: &str) -> FeatureVector<T> {
        self.encode(&self.tokens(text).as_strs())
    }
}
