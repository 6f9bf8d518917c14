//! Evaluation metrics for single-label multi-class predictions.

mod auc;
mod confusion;
mod report;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ProbVector;
use crate::scalar::Scalar;

pub use auc::{roc_auc, roc_auc_per_class, AucAveraging};
pub use confusion::{confusion_matrix, write_confusion_csv, ConfusionMatrix, Normalization};
pub use report::{evaluate, write_metrics_csv, MetricsReport, PerClassMetrics};

/// Row sums must lie within this distance of one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no predictions")]
    Empty,
    #[error("{labels} labels but {rows} probability rows")]
    LengthMismatch { labels: usize, rows: usize },
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("row {row}: {reason}")]
    InvalidProbabilities { row: usize, reason: String },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("k = {k} outside 1..={classes}")]
    KOutOfRange { k: usize, classes: usize },
    #[error("class {0} has no positive or no negative samples")]
    DegenerateClass(usize),
    #[error("expected {expected} class names, got {found}")]
    ClassNames { expected: usize, found: usize },
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

/// True labels together with the predicted class-probability matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    true_labels: Vec<usize>,
    /// Row-major `n x C`.
    probs: Vec<f64>,
    predicted: Vec<usize>,
    n_classes: usize,
}

impl PredictionSet {
    /// Validates the rows and derives predictions by argmax, lowest index
    /// first on ties.
    pub fn new(true_labels: Vec<usize>, rows: Vec<Vec<f64>>) -> Result<Self, MetricsError> {
        if true_labels.len() != rows.len() {
            return Err(MetricsError::LengthMismatch {
                labels: true_labels.len(),
                rows: rows.len(),
            });
        }
        if rows.is_empty() {
            return Err(MetricsError::Empty);
        }
        let c = rows[0].len();
        if c < 2 {
            return Err(MetricsError::TooFewClasses(c));
        }
        let mut probs = Vec::with_capacity(rows.len() * c);
        let mut predicted = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let bad = |reason: String| MetricsError::InvalidProbabilities { row: i, reason };
            if row.len() != c {
                return Err(bad(format!("{} entries, expected {c}", row.len())));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(bad(format!("probability {p} outside [0, 1]")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(bad(format!("sums to {total}")));
            }
            predicted.push(crate::classify::argmax(row));
            probs.extend_from_slice(row);
        }
        if let Some(&label) = true_labels.iter().find(|&&l| l >= c) {
            return Err(MetricsError::LabelOutOfRange { label, classes: c });
        }
        Ok(PredictionSet {
            true_labels,
            probs,
            predicted,
            n_classes: c,
        })
    }

    pub fn from_prob_vectors<T: Scalar>(
        true_labels: Vec<usize>,
        rows: &[ProbVector<T>],
    ) -> Result<Self, MetricsError> {
        let rows = rows
            .iter()
            .map(|p| p.probabilities().iter().map(|v| v.to_f64_lossy()).collect())
            .collect();
        Self::new(true_labels, rows)
    }

    /// Hard predictions as one-hot probability rows.
    pub fn from_labels(
        true_labels: Vec<usize>,
        predicted: &[usize],
        n_classes: usize,
    ) -> Result<Self, MetricsError> {
        let rows = predicted
            .iter()
            .map(|&p| {
                if p >= n_classes {
                    return Err(MetricsError::LabelOutOfRange {
                        label: p,
                        classes: n_classes,
                    });
                }
                let mut row = vec![0.0; n_classes];
                row[p] = 1.0;
                Ok(row)
            })
            .collect::<Result<_, _>>()?;
        Self::new(true_labels, rows)
    }

    pub fn len(&self) -> usize {
        self.true_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn true_labels(&self) -> &[usize] {
        &self.true_labels
    }

    pub fn predicted(&self) -> &[usize] {
        &self.predicted
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.n_classes..(i + 1) * self.n_classes]
    }

    /// Number of samples per true class.
    pub fn supports(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_classes];
        self.true_labels.iter().for_each(|&y| s[y] += 1);
        s
    }

    fn correct(&self) -> usize {
        self.true_labels
            .iter()
            .zip(&self.predicted)
            .filter(|(a, b)| a == b)
            .count()
    }
}

pub fn accuracy(preds: &PredictionSet) -> f64 {
    preds.correct() as f64 / preds.len() as f64
}

/// Mean per-class recall over the classes that occur in the true labels.
pub fn balanced_accuracy(preds: &PredictionSet) -> f64 {
    let support = preds.supports();
    let mut hits = vec![0usize; preds.n_classes];
    for (&y, &p) in preds.true_labels.iter().zip(&preds.predicted) {
        if y == p {
            hits[y] += 1;
        }
    }
    let recalls: Vec<f64> = support
        .iter()
        .zip(&hits)
        .filter(|(&s, _)| s > 0)
        .map(|(&s, &h)| h as f64 / s as f64)
        .collect();
    recalls.iter().sum::<f64>() / recalls.len() as f64
}

/// One-vs-rest scores for one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    pub micro: f64,
    pub macro_avg: f64,
    pub weighted: f64,
    pub per_class: Vec<ClassScores>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Micro F1 pools TP/FP/FN over classes; macro averages per-class F1 over
/// all classes; weighted uses true-class support as weights.
pub fn f1_scores(preds: &PredictionSet) -> F1Scores {
    let c = preds.n_classes;
    let (mut tp, mut fp, mut fne) = (vec![0usize; c], vec![0usize; c], vec![0usize; c]);
    for (&y, &p) in preds.true_labels.iter().zip(&preds.predicted) {
        if y == p {
            tp[y] += 1;
        } else {
            fp[p] += 1;
            fne[y] += 1;
        }
    }
    let per_class: Vec<ClassScores> = (0..c)
        .map(|k| ClassScores {
            precision: ratio(tp[k], tp[k] + fp[k]),
            recall: ratio(tp[k], tp[k] + fne[k]),
            f1: ratio(2 * tp[k], 2 * tp[k] + fp[k] + fne[k]),
            support: tp[k] + fne[k],
        })
        .collect();
    let (stp, sfp, sfn): (usize, usize, usize) =
        (tp.iter().sum(), fp.iter().sum(), fne.iter().sum());
    let micro = ratio(2 * stp, 2 * stp + sfp + sfn);
    let macro_avg = per_class.iter().map(|s| s.f1).sum::<f64>() / c as f64;
    let weighted = per_class.iter().map(|s| s.f1 * s.support as f64).sum::<f64>() / preds.len() as f64;
    F1Scores {
        micro,
        macro_avg,
        weighted,
        per_class,
    }
}

/// Fraction of samples whose true class ranks among the `k` largest
/// probabilities, equal probabilities ranked by lower class index first.
pub fn top_k_accuracy(preds: &PredictionSet, k: usize) -> Result<f64, MetricsError> {
    let c = preds.n_classes;
    if k == 0 || k > c {
        return Err(MetricsError::KOutOfRange { k, classes: c });
    }
    let hits = preds
        .true_labels
        .iter()
        .enumerate()
        .filter(|&(i, &y)| {
            let row = preds.row(i);
            let py = row[y];
            let rank = row
                .iter()
                .enumerate()
                .filter(|&(j, &p)| p > py || (p == py && j < y))
                .count();
            rank < k
        })
        .count();
    Ok(hits as f64 / preds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_counts() {
        let p = PredictionSet::from_labels(vec![0, 1, 1, 0], &[0, 1, 0, 0], 2).unwrap();
        assert_eq!(accuracy(&p), 0.75);
        let all = PredictionSet::from_labels(vec![0, 1], &[0, 1], 2).unwrap();
        assert_eq!(accuracy(&all), 1.0);
        let none = PredictionSet::from_labels(vec![0, 1], &[1, 0], 2).unwrap();
        assert_eq!(accuracy(&none), 0.0);
    }

    #[test]
    fn balanced_accuracy_averages_recalls() {
        // class 0 recall 1.0, class 1 recall 0.5
        let p = PredictionSet::from_labels(vec![0, 0, 1, 1], &[0, 0, 1, 0], 2).unwrap();
        assert_eq!(balanced_accuracy(&p), 0.75);
        let perfect = PredictionSet::from_labels(vec![0, 2, 1], &[0, 2, 1], 3).unwrap();
        assert_eq!(balanced_accuracy(&perfect), 1.0);
        // absent class 2 does not enter the mean
        let q = PredictionSet::from_labels(vec![0, 1], &[0, 2], 3).unwrap();
        assert_eq!(balanced_accuracy(&q), 0.5);
    }

    #[test]
    fn balanced_equals_plain_on_equal_supports() {
        let truth = vec![0, 0, 0, 1, 1, 1, 2, 2, 2];
        let pred = [0, 1, 0, 1, 1, 2, 2, 0, 0];
        let p = PredictionSet::from_labels(truth, &pred, 3).unwrap();
        assert!((balanced_accuracy(&p) - accuracy(&p)).abs() < 1e-15);
    }

    #[test]
    fn f1_hand_oracle() {
        // counts (0,0)=2, (0,1)=1, (1,1)=2, (2,2)=1
        let truth = vec![0, 0, 0, 1, 1, 2];
        let pred = [0, 0, 1, 1, 1, 2];
        let f = f1_scores(&PredictionSet::from_labels(truth, &pred, 3).unwrap());
        // class 0: P=1, R=2/3 -> 0.8; class 1: P=2/3, R=1 -> 0.8; class 2: 1
        let expect = [0.8, 0.8, 1.0];
        for (s, e) in f.per_class.iter().zip(expect) {
            assert!((s.f1 - e).abs() < 1e-15);
        }
        assert!((f.macro_avg - 2.6 / 3.0).abs() < 1e-15);
        assert!((f.weighted - (0.8 * 3.0 + 0.8 * 2.0 + 1.0) / 6.0).abs() < 1e-15);
        assert_eq!(f.micro, 5.0 / 6.0);
    }

    #[test]
    fn f1_absent_class_counts_zero_in_macro() {
        let p = PredictionSet::from_labels(vec![0, 1], &[0, 1], 3).unwrap();
        let f = f1_scores(&p);
        assert_eq!(f.micro, 1.0);
        assert!((f.macro_avg - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.weighted, 1.0);
    }

    #[test]
    fn top_k_ties_and_range() {
        let p = PredictionSet::new(
            vec![1, 0, 2],
            vec![vec![0.4, 0.4, 0.2], vec![0.2, 0.3, 0.5], vec![0.2, 0.4, 0.4]],
        )
        .unwrap();
        assert_eq!(p.predicted(), &[0, 2, 1]);
        assert_eq!(top_k_accuracy(&p, 1).unwrap(), 0.0);
        assert!((top_k_accuracy(&p, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(top_k_accuracy(&p, 3).unwrap(), 1.0);
        assert!(top_k_accuracy(&p, 0).is_err());
        assert!(top_k_accuracy(&p, 4).is_err());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(PredictionSet::new(vec![0], vec![vec![0.5, 0.6]]).is_err());
        assert!(PredictionSet::new(vec![0], vec![vec![1.5, -0.5]]).is_err());
        assert!(PredictionSet::new(vec![2], vec![vec![0.5, 0.5]]).is_err());
        assert!(PredictionSet::new(vec![], vec![]).is_err());
        assert!(PredictionSet::new(vec![0], vec![vec![1.0]]).is_err());
    }
}
