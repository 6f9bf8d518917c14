use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lbfgs::{minimize, LbfgsSettings};
use super::model::{validate_design, LogRegModel, Objective};
use super::ClassifyError;
use crate::featurize::FeatureVector;
use crate::scalar::Scalar;

const LBFGS_MEMORY: usize = 10;

/// Grid-search training settings. `lambda` multiplies `(1/2) ||W||_F^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lambda_grid: Vec<f64>,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Kept for interface uniformity; zero initialization makes fits seed-free.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            max_iterations: 1000,
            gradient_tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        if self.lambda_grid.is_empty() {
            return Err(ClassifyError::EmptyGrid);
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(ClassifyError::InvalidConfig(format!("lambda {l} is not a nonnegative real")));
        }
        if self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ClassifyError::InvalidConfig(
                "lambda_grid must be strictly ascending".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(ClassifyError::InvalidConfig("max_iterations must be positive".into()));
        }
        if !(self.gradient_tolerance > 0.0 && self.gradient_tolerance.is_finite()) {
            return Err(ClassifyError::InvalidConfig(
                "gradient_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Feature rows paired with class indices.
#[derive(Debug, Clone, Copy)]
pub struct LabeledFeatures<'a, T> {
    pub features: &'a [FeatureVector<T>],
    pub labels: &'a [usize],
}

impl<'a, T> LabeledFeatures<'a, T> {
    pub fn new(features: &'a [FeatureVector<T>], labels: &'a [usize]) -> Self {
        LabeledFeatures { features, labels }
    }
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda: f64,
    pub validation_micro_f1: f64,
    pub train_loss: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub grid: Vec<GridPoint>,
    pub selected_index: usize,
    pub selected_lambda: f64,
}

/// Fits one model per grid value from zero initialization and keeps the one
/// with the best validation micro-F1 (ties go to the larger penalty).
pub fn train_logreg<T: Scalar>(
    train: LabeledFeatures<'_, T>,
    validation: LabeledFeatures<'_, T>,
    class_names: &[String],
    cfg: &TrainConfig,
) -> Result<(LogRegModel<T>, SelectionReport), ClassifyError> {
    cfg.validate()?;
    let c = class_names.len();
    let d = train.features.first().map_or(0, FeatureVector::dimension);
    validate_design(c, d, train.features, train.labels)?;
    validate_design(c, d, validation.features, validation.labels)?;
    let mut present = vec![false; c];
    train.labels.iter().for_each(|&l| present[l] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(ClassifyError::SingleClass);
    }
    if let Some(&l) = validation.labels.iter().find(|&&l| !present[l]) {
        return Err(ClassifyError::UnseenValidationClass(class_names[l].clone()));
    }
    for (k, seen) in present.iter().enumerate() {
        if !seen {
            warn!("class {} has no training documents", class_names[k]);
        }
    }

    let fits: Vec<(LogRegModel<T>, GridPoint)> = cfg
        .lambda_grid
        .par_iter()
        .map(|&lambda| fit_one(train, validation, class_names, lambda, cfg))
        .collect::<Result<_, _>>()?;

    let mut selected = 0;
    for (i, (_, point)) in fits.iter().enumerate() {
        // ascending grid, so `>=` prefers the larger lambda on ties
        if point.validation_micro_f1 >= fits[selected].1.validation_micro_f1 {
            selected = i;
        }
    }
    let grid: Vec<GridPoint> = fits.iter().map(|(_, p)| p.clone()).collect();
    let selected_lambda = grid[selected].lambda;
    info!(
        "selected lambda {selected_lambda} (validation micro-F1 {:.4})",
        grid[selected].validation_micro_f1
    );
    let model = fits.into_iter().nth(selected).expect("selected index in range").0;
    Ok((
        model,
        SelectionReport {
            grid,
            selected_index: selected,
            selected_lambda,
        },
    ))
}

fn fit_one<T: Scalar>(
    train: LabeledFeatures<'_, T>,
    validation: LabeledFeatures<'_, T>,
    class_names: &[String],
    lambda: f64,
    cfg: &TrainConfig,
) -> Result<(LogRegModel<T>, GridPoint), ClassifyError> {
    let d = train.features[0].dimension();
    let mut model = LogRegModel::zeros(class_names.to_vec(), d)?.with_lambda(T::lit(lambda))?;
    let objective = Objective {
        xs: train.features,
        y: train.labels,
        n_classes: class_names.len(),
        dim: d,
        lambda: T::lit(lambda),
    };
    let settings = LbfgsSettings {
        max_iterations: cfg.max_iterations,
        gradient_tolerance: cfg.gradient_tolerance,
        memory: LBFGS_MEMORY,
    };
    let outcome = minimize(|p, g| objective.eval(p, g), model.to_params(), settings)
        .map_err(|e| ClassifyError::NonFinite { iteration: e.iteration })?;
    if !outcome.converged {
        warn!(
            "lambda {lambda}: stopped after {} iterations with gradient norm {:e}",
            outcome.iterations, outcome.gradient_norm.to_f64_lossy()
        );
    }
    model.set_params(&outcome.x);
    let correct = validation
        .features
        .iter()
        .zip(validation.labels)
        .filter(|(x, &y)| model.predict(x).is_ok_and(|p| p == y))
        .count();
    // single-label micro-F1 reduces to accuracy
    let micro_f1 = correct as f64 / validation.labels.len() as f64;
    debug!(
        "lambda {lambda}: loss {} after {} iterations, validation micro-F1 {micro_f1:.4}",
        outcome.value, outcome.iterations
    );
    Ok((
        model,
        GridPoint {
            lambda,
            validation_micro_f1: micro_f1,
            train_loss: outcome.value.to_f64_lossy(),
            iterations: outcome.iterations,
            gradient_norm: outcome.gradient_norm.to_f64_lossy(),
            converged: outcome.converged,
        },
    ))
}
