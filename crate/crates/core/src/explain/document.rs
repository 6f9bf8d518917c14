use serde::{Deserialize, Serialize};

use super::{
    build_partition_tree, exact_shapley, make_value_function, owen_values, Coalition, ExplainError,
    ModelValueFunction, ValueFunction,
};
use crate::classify::LogRegModel;
use crate::corpus::Document;
use crate::featurize::TokenFeaturizer;
use crate::scalar::Scalar;

/// Documents with at most this many tokens get exact Shapley values.
pub const DEFAULT_EXACT_THRESHOLD: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Predicted,
    Class(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainOptions {
    /// Use exact Shapley values up to this many tokens, Owen values above.
    pub exact_threshold: usize,
    /// Permit featurizers whose encoding re-runs inference per subset.
    pub allow_expensive_featurizer: bool,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        ExplainOptions {
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            allow_expensive_featurizer: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Owen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Attribution<T: Scalar> {
    pub token: String,
    pub position: usize,
    pub value: T,
}

/// Per-token attributions of one document's target-class log-odds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Explanation<T: Scalar> {
    pub doc_id: String,
    pub target_class: String,
    pub method: Method,
    pub tokens: Vec<Attribution<T>>,
    pub v_full: T,
    pub v_empty: T,
}

impl<T: Scalar> Explanation<T> {
    /// Highest attribution; earliest position on ties.
    pub fn top(&self) -> Option<&Attribution<T>> {
        self.tokens
            .iter()
            .fold(None, |best: Option<&Attribution<T>>, a| match best {
                Some(b) if b.value >= a.value => Some(b),
                _ => Some(a),
            })
    }
}

pub(crate) fn check_featurizer<T: Scalar>(
    featurizer: &dyn TokenFeaturizer<T>,
    options: &ExplainOptions,
) -> Result<(), ExplainError> {
    if featurizer.encode_is_expensive() && !options.allow_expensive_featurizer {
        return Err(ExplainError::ExpensiveFeaturizer);
    }
    Ok(())
}

/// Attributions of the current target of `game`.
pub(crate) fn attribute<T: Scalar>(
    game: &ModelValueFunction<'_, T>,
    options: &ExplainOptions,
) -> Result<(Method, Vec<T>), ExplainError> {
    let n = game.n_players();
    if n <= options.exact_threshold.min(super::MAX_EXACT_PLAYERS) {
        Ok((Method::Exact, exact_shapley(game)?))
    } else {
        Ok((Method::Owen, owen_values(game, &build_partition_tree(n))?))
    }
}

pub(crate) fn assemble<T: Scalar>(
    doc_id: &str,
    game: &ModelValueFunction<'_, T>,
    class_name: &str,
    method: Method,
    values: Vec<T>,
) -> Result<Explanation<T>, ExplainError> {
    let n = game.n_players();
    Ok(Explanation {
        doc_id: doc_id.to_string(),
        target_class: class_name.to_string(),
        method,
        tokens: game
            .tokens()
            .iter()
            .zip(values)
            .enumerate()
            .map(|(position, (token, value))| Attribution {
                token: token.clone(),
                position,
                value,
            })
            .collect(),
        v_full: game.value(&Coalition::full(n))?,
        v_empty: game.value(&Coalition::empty(n))?,
    })
}

/// Explains `target` (by default the predicted class) for one document.
pub fn explain_document<T: Scalar>(
    model: &LogRegModel<T>,
    featurizer: &dyn TokenFeaturizer<T>,
    doc: &Document,
    target: &Target,
    options: &ExplainOptions,
) -> Result<Explanation<T>, ExplainError> {
    check_featurizer(featurizer, options)?;
    let tokens = featurizer.tokens(&doc.text).into_vec();
    if tokens.is_empty() {
        return Err(ExplainError::EmptyDocument(doc.id.clone()));
    }
    let n = tokens.len();
    let mut game = make_value_function(model, featurizer, tokens, 0)?;
    let class = match target {
        Target::Predicted => crate::classify::argmax(&game.logits(&Coalition::full(n))?),
        Target::Class(name) => model
            .class_names()
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| ExplainError::UnknownClass(name.clone()))?,
    };
    game.set_target(class)?;
    let (method, values) = attribute(&game, options)?;
    assemble(&doc.id, &game, &model.class_names()[class], method, values)
}
