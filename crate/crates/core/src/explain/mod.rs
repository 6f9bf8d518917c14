//! Token attributions of a classifier's class log-odds: exact Shapley values
//! for short documents and Owen values over an order-respecting binary
//! coalition tree otherwise.

mod coalition;
mod document;
mod game;
mod global;
mod owen;
mod shapley;

use std::path::PathBuf;

use thiserror::Error;

use crate::classify::ClassifyError;

pub use coalition::Coalition;
pub use document::{
    explain_document, Attribution, ExplainOptions, Explanation, Method, Target,
    DEFAULT_EXACT_THRESHOLD,
};
pub use game::{make_value_function, FnGame, ModelValueFunction, TabulatedGame, ValueFunction};
pub use global::{global_importance, GlobalImportance};
pub use owen::{build_partition_tree, owen_values, CoalitionTree, TreeNode};
pub use shapley::{exact_shapley, MAX_EXACT_PLAYERS};

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("{n} players exceed the exact enumeration limit of {limit}; use owen_values")]
    TooManyPlayers { n: usize, limit: usize },
    #[error("tree has {leaves} leaves but the game has {players} players")]
    TreeMismatch { leaves: usize, players: usize },
    #[error("model expects {model} features, featurizer produces {featurizer}")]
    Incompatible { model: usize, featurizer: usize },
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("document {0:?} has no tokens after preprocessing")]
    EmptyDocument(String),
    #[error("no documents to explain")]
    EmptyDataset,
    #[error("featurizer re-runs inference per subset; enable it explicitly to explain with it")]
    ExpensiveFeaturizer,
    #[error("evaluating subset {subset:?}: {source}")]
    Evaluation {
        subset: Vec<usize>,
        #[source]
        source: ClassifyError,
    },
    #[error("non-finite value on subset {subset:?}")]
    NonFinite { subset: Vec<usize> },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[cfg(test)]
mod tests;
