use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MetricsError, PredictionSet};

/// `counts[i][j]`: samples of true class `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
    /// Each row divided by its sum; rows of absent classes stay zero.
    pub row_normalized: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Counts,
    Rows,
}

pub fn confusion_matrix(preds: &PredictionSet) -> ConfusionMatrix {
    let c = preds.n_classes();
    let mut counts = vec![vec![0usize; c]; c];
    for (&y, &p) in preds.true_labels().iter().zip(preds.predicted()) {
        counts[y][p] += 1;
    }
    let row_normalized = counts
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            row.iter()
                .map(|&v| if total == 0 { 0.0 } else { v as f64 / total as f64 })
                .collect()
        })
        .collect();
    ConfusionMatrix {
        counts,
        row_normalized,
    }
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn supports(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Indices of the `k` classes with the largest support, in class order.
    pub fn top_by_support(&self, k: usize) -> Vec<usize> {
        let support = self.supports();
        let mut idx: Vec<usize> = (0..self.n_classes()).collect();
        idx.sort_by(|&a, &b| support[b].cmp(&support[a]).then(a.cmp(&b)));
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }
}

/// Writes the matrix as CSV with a `class` column followed by one column per
/// predicted class. `classes` restricts rows and columns to a subset;
/// normalized rows keep their full-row denominators.
pub fn write_confusion_csv(
    path: &Path,
    class_names: &[String],
    matrix: &ConfusionMatrix,
    normalization: Normalization,
    classes: Option<&[usize]>,
) -> Result<(), MetricsError> {
    let c = matrix.n_classes();
    if class_names.len() != c {
        return Err(MetricsError::ClassNames {
            expected: c,
            found: class_names.len(),
        });
    }
    let all: Vec<usize> = (0..c).collect();
    let selected = classes.unwrap_or(&all);
    let csv_err = |source| MetricsError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let header = std::iter::once("class").chain(selected.iter().map(|&j| class_names[j].as_str()));
    w.write_record(header).map_err(csv_err)?;
    for &i in selected {
        let mut record = vec![class_names[i].clone()];
        record.extend(selected.iter().map(|&j| match normalization {
            Normalization::Counts => matrix.counts[i][j].to_string(),
            Normalization::Rows => matrix.row_normalized[i][j].to_string(),
        }));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    })
}
