use std::cell::RefCell;
use std::collections::HashMap;

use super::{Coalition, ExplainError};
use crate::classify::LogRegModel;
use crate::featurize::TokenFeaturizer;
use crate::scalar::Scalar;

/// A cooperative game over token positions.
pub trait ValueFunction<T: Scalar> {
    fn n_players(&self) -> usize;

    fn value(&self, coalition: &Coalition) -> Result<T, ExplainError>;
}

/// A game given by its value on every subset, indexed by bit mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedGame<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> TabulatedGame<T> {
    /// # Panics
    /// If `values.len() != 2^n` or `n > 20`.
    pub fn new(n: usize, values: Vec<T>) -> Self {
        assert!(n <= 20, "tabulated games support at most 20 players");
        assert_eq!(values.len(), 1 << n, "need one value per subset");
        TabulatedGame { n, values }
    }

    /// Tabulates `f` over all subsets.
    pub fn from_fn(n: usize, f: impl Fn(&Coalition) -> T) -> Self {
        let values = (0..1u64 << n).map(|m| f(&Coalition::from_mask(n, m))).collect();
        Self::new(n, values)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

impl<T: Scalar> ValueFunction<T> for TabulatedGame<T> {
    fn n_players(&self) -> usize {
        self.n
    }

    fn value(&self, coalition: &Coalition) -> Result<T, ExplainError> {
        let mask = coalition.to_mask().expect("at most 20 players");
        Ok(self.values[mask as usize])
    }
}

/// A game defined by a closure.
pub struct FnGame<F> {
    n: usize,
    f: F,
}

impl<F> FnGame<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnGame { n, f }
    }
}

impl<T: Scalar, F: Fn(&Coalition) -> T> ValueFunction<T> for FnGame<F> {
    fn n_players(&self) -> usize {
        self.n
    }

    fn value(&self, coalition: &Coalition) -> Result<T, ExplainError> {
        Ok((self.f)(coalition))
    }
}

/// Target-class log-odds of a model on a document reduced to a subset of
/// its tokens. Removed tokens are dropped and the survivors re-encoded in
/// their original order.
///
/// Logits are cached per coalition, so switching the target class with
/// [`ModelValueFunction::set_target`] reuses earlier evaluations.
pub struct ModelValueFunction<'a, T: Scalar> {
    model: &'a LogRegModel<T>,
    featurizer: &'a dyn TokenFeaturizer<T>,
    tokens: Vec<String>,
    target: usize,
    cache: RefCell<HashMap<Coalition, Vec<T>>>,
}

pub fn make_value_function<'a, T: Scalar>(
    model: &'a LogRegModel<T>,
    featurizer: &'a dyn TokenFeaturizer<T>,
    tokens: Vec<String>,
    target: usize,
) -> Result<ModelValueFunction<'a, T>, ExplainError> {
    if featurizer.dimension() != model.feature_dimension() {
        return Err(ExplainError::Incompatible {
            model: model.feature_dimension(),
            featurizer: featurizer.dimension(),
        });
    }
    if target >= model.n_classes() {
        return Err(ExplainError::UnknownClass(target.to_string()));
    }
    Ok(ModelValueFunction {
        model,
        featurizer,
        tokens,
        target,
        cache: RefCell::new(HashMap::new()),
    })
}

impl<T: Scalar> ModelValueFunction<'_, T> {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn set_target(&mut self, target: usize) -> Result<(), ExplainError> {
        if target >= self.model.n_classes() {
            return Err(ExplainError::UnknownClass(target.to_string()));
        }
        self.target = target;
        Ok(())
    }

    /// Distinct coalitions evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.cache.borrow().len()
    }

    pub fn logits(&self, coalition: &Coalition) -> Result<Vec<T>, ExplainError> {
        if let Some(z) = self.cache.borrow().get(coalition) {
            return Ok(z.clone());
        }
        let kept: Vec<&str> = coalition.members().map(|i| self.tokens[i].as_str()).collect();
        let x = self.featurizer.encode(&kept);
        let z = self.model.logits(&x).map_err(|source| ExplainError::Evaluation {
            subset: coalition.members().collect(),
            source,
        })?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(ExplainError::NonFinite {
                subset: coalition.members().collect(),
            });
        }
        self.cache.borrow_mut().insert(coalition.clone(), z.clone());
        Ok(z)
    }
}

impl<T: Scalar> ValueFunction<T> for ModelValueFunction<'_, T> {
    fn n_players(&self) -> usize {
        self.tokens.len()
    }

    fn value(&self, coalition: &Coalition) -> Result<T, ExplainError> {
        let z = self.logits(coalition)?;
        Ok(self
            .model
            .log_odds_from_logits(&z, self.target)
            .expect("target checked on construction"))
    }
}
