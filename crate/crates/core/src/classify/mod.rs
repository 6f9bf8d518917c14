//! Multinomial logistic regression with L2 penalty and validation grid search.

mod lbfgs;
mod model;
mod train;

use thiserror::Error;

pub use model::{
    log_odds_of, loss_and_gradient, softmax, LogRegGradient, LogRegModel, ProbVector,
    PROBABILITY_FLOOR,
};
pub(crate) use model::argmax;
pub use train::{train_logreg, GridPoint, LabeledFeatures, SelectionReport, TrainConfig};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("no training examples")]
    EmptyData,
    #[error("class index {0} out of range")]
    UnknownClass(usize),
    #[error("non-finite loss or gradient at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("training data contains fewer than 2 classes")]
    SingleClass,
    #[error("validation class {0:?} does not occur in training data")]
    UnseenValidationClass(String),
    #[error("lambda grid is empty")]
    EmptyGrid,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}
