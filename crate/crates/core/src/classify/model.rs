use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::featurize::FeatureVector;
use crate::scalar::Scalar;

/// Probability clamp used by [`log_odds_of`].
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Class probabilities in canonical class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector<T>(Vec<T>);

impl<T: Scalar> ProbVector<T> {
    pub fn probabilities(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

pub(crate) fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &p) in v.iter().enumerate().skip(1) {
        if p > v[best] {
            best = i;
        }
    }
    best
}

/// Max-shifted softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> ProbVector<T> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    ProbVector(out)
}

pub(crate) fn softmax_in_place<T: Scalar>(z: &mut [T]) {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut total = T::zero();
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

fn log_sum_exp<T: Scalar>(z: &[T]) -> T {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + z.iter().map(|&v| (v - max).exp()).sum::<T>().ln()
}

/// `ln(p / (1 - p))` with `p` clamped to `[1e-12, 1 - 1e-12]`.
pub fn log_odds_of<T: Scalar>(p: T) -> T {
    let p = p.to_f64_lossy().clamp(0.0, 1.0);
    // clamp the complement directly so the upper bound is not lost to rounding
    let q = (1.0 - p).max(PROBABILITY_FLOOR);
    let p = p.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR);
    T::lit(p.ln() - q.ln())
}

fn log_odds_bound() -> f64 {
    ((1.0 - PROBABILITY_FLOOR) / PROBABILITY_FLOOR).ln()
}

/// Multinomial logistic regression: `softmax(W x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel<T>", into = "RawModel<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct LogRegModel<T: Scalar> {
    class_names: Vec<String>,
    feature_dimension: usize,
    /// Row-major `C x D`.
    weights: Vec<T>,
    bias: Vec<T>,
    lambda: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct RawModel<T: Scalar> {
    class_names: Vec<String>,
    feature_dimension: usize,
    weights: Vec<Vec<T>>,
    bias: Vec<T>,
    lambda: T,
}

impl<T: Scalar> TryFrom<RawModel<T>> for LogRegModel<T> {
    type Error = ClassifyError;

    fn try_from(raw: RawModel<T>) -> Result<Self, ClassifyError> {
        let d = raw.feature_dimension;
        if let Some(row) = raw.weights.iter().find(|r| r.len() != d) {
            return Err(ClassifyError::InvalidModel(format!(
                "weight row has {} entries, feature_dimension is {d}",
                row.len()
            )));
        }
        let weights = raw.weights.into_iter().flatten().collect();
        let model = LogRegModel::from_parts(raw.class_names, d, weights, raw.bias)?;
        model.with_lambda(raw.lambda)
    }
}

impl<T: Scalar> From<LogRegModel<T>> for RawModel<T> {
    fn from(m: LogRegModel<T>) -> Self {
        let d = m.feature_dimension;
        let weights = if d == 0 {
            vec![Vec::new(); m.class_names.len()]
        } else {
            m.weights.chunks(d).map(<[T]>::to_vec).collect()
        };
        RawModel {
            class_names: m.class_names,
            feature_dimension: d,
            weights,
            bias: m.bias,
            lambda: m.lambda,
        }
    }
}

impl<T: Scalar> LogRegModel<T> {
    /// All-zero parameters.
    pub fn zeros(class_names: Vec<String>, feature_dimension: usize) -> Result<Self, ClassifyError> {
        let c = class_names.len();
        Self::from_parts(
            class_names,
            feature_dimension,
            vec![T::zero(); c * feature_dimension],
            vec![T::zero(); c],
        )
    }

    pub fn from_parts(
        class_names: Vec<String>,
        feature_dimension: usize,
        weights: Vec<T>,
        bias: Vec<T>,
    ) -> Result<Self, ClassifyError> {
        let c = class_names.len();
        if c < 2 {
            return Err(ClassifyError::InvalidModel(format!("need at least 2 classes, got {c}")));
        }
        if weights.len() != c * feature_dimension || bias.len() != c {
            return Err(ClassifyError::InvalidModel(format!(
                "expected {c}x{feature_dimension} weights and {c} biases, got {} and {}",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(ClassifyError::InvalidModel("non-finite parameter".into()));
        }
        Ok(LogRegModel {
            class_names,
            feature_dimension,
            weights,
            bias,
            lambda: T::zero(),
        })
    }

    pub(crate) fn with_lambda(mut self, lambda: T) -> Result<Self, ClassifyError> {
        if !lambda.is_finite() || lambda < T::zero() {
            return Err(ClassifyError::InvalidModel(format!("invalid lambda {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature_dimension(&self) -> usize {
        self.feature_dimension
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight_row(&self, class: usize) -> &[T] {
        let d = self.feature_dimension;
        &self.weights[class * d..(class + 1) * d]
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    /// Penalty the model was trained with.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn weight_norm(&self) -> T {
        crate::scalar::norm_sq(&self.weights).sqrt()
    }

    fn check(&self, x: &FeatureVector<T>) -> Result<(), ClassifyError> {
        if x.dimension() != self.feature_dimension {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.feature_dimension,
                found: x.dimension(),
            });
        }
        Ok(())
    }

    pub(crate) fn logits_unchecked(&self, x: &FeatureVector<T>, out: &mut [T]) {
        for (k, z) in out.iter_mut().enumerate() {
            *z = self.bias[k] + x.dot(self.weight_row(k));
        }
    }

    pub fn logits(&self, x: &FeatureVector<T>) -> Result<Vec<T>, ClassifyError> {
        self.check(x)?;
        let mut z = vec![T::zero(); self.n_classes()];
        self.logits_unchecked(x, &mut z);
        Ok(z)
    }

    pub fn predict_proba(&self, x: &FeatureVector<T>) -> Result<ProbVector<T>, ClassifyError> {
        let mut z = self.logits(x)?;
        softmax_in_place(&mut z);
        Ok(ProbVector(z))
    }

    pub fn predict(&self, x: &FeatureVector<T>) -> Result<usize, ClassifyError> {
        Ok(self.predict_proba(x)?.argmax())
    }

    /// Log-odds of `class`, computed from the logits as
    /// `z_c - logsumexp(z_j, j != c)` and clamped to the range implied by the
    /// probability floor.
    pub fn log_odds(&self, x: &FeatureVector<T>, class: usize) -> Result<T, ClassifyError> {
        let z = self.logits(x)?;
        self.log_odds_from_logits(&z, class)
    }

    pub(crate) fn log_odds_from_logits(&self, z: &[T], class: usize) -> Result<T, ClassifyError> {
        if class >= z.len() {
            return Err(ClassifyError::UnknownClass(class));
        }
        let rest: Vec<T> = z
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != class)
            .map(|(_, &v)| v)
            .collect();
        let bound = T::lit(log_odds_bound());
        Ok((z[class] - log_sum_exp(&rest)).max(-bound).min(bound))
    }

    /// Flat parameter vector `[W (row-major), b]`.
    pub(crate) fn to_params(&self) -> Vec<T> {
        self.weights.iter().chain(&self.bias).copied().collect()
    }

    pub(crate) fn set_params(&mut self, params: &[T]) {
        let nw = self.weights.len();
        self.weights.copy_from_slice(&params[..nw]);
        self.bias.copy_from_slice(&params[nw..]);
    }
}

/// Gradient of the training loss, shaped like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegGradient<T> {
    /// Row-major `C x D`.
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

/// Mean negative log-likelihood plus `(lambda/2) ||W||_F^2`; the bias is not
/// penalized.
pub fn loss_and_gradient<T: Scalar>(
    model: &LogRegModel<T>,
    xs: &[FeatureVector<T>],
    y: &[usize],
    lambda: T,
) -> Result<(T, LogRegGradient<T>), ClassifyError> {
    validate_design(model.n_classes(), model.feature_dimension(), xs, y)?;
    let params = model.to_params();
    let mut grad = vec![T::zero(); params.len()];
    let obj = Objective {
        xs,
        y,
        n_classes: model.n_classes(),
        dim: model.feature_dimension(),
        lambda,
    };
    let loss = obj.eval(&params, &mut grad);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(ClassifyError::NonFinite { iteration: 0 });
    }
    let bias = grad.split_off(model.weights.len());
    Ok((loss, LogRegGradient { weights: grad, bias }))
}

pub(crate) fn validate_design<T: Scalar>(
    n_classes: usize,
    dim: usize,
    xs: &[FeatureVector<T>],
    y: &[usize],
) -> Result<(), ClassifyError> {
    if xs.len() != y.len() {
        return Err(ClassifyError::LengthMismatch {
            rows: xs.len(),
            labels: y.len(),
        });
    }
    if xs.is_empty() {
        return Err(ClassifyError::EmptyData);
    }
    if let Some(x) = xs.iter().find(|x| x.dimension() != dim) {
        return Err(ClassifyError::DimensionMismatch {
            expected: dim,
            found: x.dimension(),
        });
    }
    if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
        return Err(ClassifyError::UnknownClass(label));
    }
    Ok(())
}

pub(crate) struct Objective<'a, T> {
    pub xs: &'a [FeatureVector<T>],
    pub y: &'a [usize],
    pub n_classes: usize,
    pub dim: usize,
    pub lambda: T,
}

impl<T: Scalar> Objective<'_, T> {
    /// Loss at `params`; writes the gradient into `grad`.
    pub fn eval(&self, params: &[T], grad: &mut [T]) -> T {
        let (c, d) = (self.n_classes, self.dim);
        let (w, b) = params.split_at(c * d);
        let (gw, gb) = grad.split_at_mut(c * d);
        gw.fill(T::zero());
        gb.fill(T::zero());
        let mut z = vec![T::zero(); c];
        let mut nll = T::zero();
        for (x, &label) in self.xs.iter().zip(self.y) {
            for (k, zk) in z.iter_mut().enumerate() {
                *zk = b[k] + x.dot(&w[k * d..(k + 1) * d]);
            }
            nll += log_sum_exp(&z) - z[label];
            softmax_in_place(&mut z);
            z[label] -= T::one();
            for (k, &r) in z.iter().enumerate() {
                gb[k] += r;
                if r != T::zero() {
                    x.axpy_into(r, &mut gw[k * d..(k + 1) * d]);
                }
            }
        }
        let inv_n = T::one() / T::from_count(self.xs.len());
        let mut reg = T::zero();
        for (g, &wv) in gw.iter_mut().zip(w) {
            *g = *g * inv_n + self.lambda * wv;
            reg += wv * wv;
        }
        gb.iter_mut().for_each(|g| *g *= inv_n);
        nll * inv_n + self.lambda * T::lit(0.5) * reg
    }
}
