//! Text classification of fund descriptions: corpus handling, preprocessing,
//! TF-IDF and embedding featurizers, softmax logistic regression, evaluation
//! metrics and Shapley/Owen token attributions.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision for the common cases.

pub mod classify;
pub mod corpus;
pub mod explain;
pub mod featurize;
pub mod metrics;
pub mod preprocess;
pub mod scalar;

use thiserror::Error;

pub use classify::{ClassifyError, LogRegModel, ProbVector, TrainConfig};
pub use corpus::{CorpusError, Dataset, Document};
pub use explain::{ExplainError, Explanation};
pub use featurize::{FeatureVector, FeaturizeError, SparseVector, TokenFeaturizer};
pub use metrics::{MetricsError, MetricsReport, PredictionSet};
pub use preprocess::{PreprocessError, Preprocessor};
pub use scalar::Scalar;

pub type LogRegModel64 = LogRegModel<f64>;
pub type LogRegModel32 = LogRegModel<f32>;
pub type FeatureVector64 = FeatureVector<f64>;
pub type FeatureVector32 = FeatureVector<f32>;
pub type EmbeddingTable64 = featurize::EmbeddingTable<f64>;
pub type EmbeddingTable32 = featurize::EmbeddingTable<f32>;
pub type Doc2VecModel64 = featurize::Doc2VecModel<f64>;
pub type Doc2VecModel32 = featurize::Doc2VecModel<f32>;
pub type Explanation64 = Explanation<f64>;
pub type Explanation32 = Explanation<f32>;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Featurize(#[from] FeaturizeError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
}

impl Error {
    /// Numeric failures (divergence, non-finite values) as opposed to bad
    /// input or configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Classify(ClassifyError::NonFinite { .. })
                | Error::Explain(ExplainError::NonFinite { .. })
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
