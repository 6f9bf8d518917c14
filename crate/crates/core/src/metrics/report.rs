use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{
    accuracy, balanced_accuracy, f1_scores, roc_auc, roc_auc_per_class, top_k_accuracy,
    AucAveraging, MetricsError, PredictionSet,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerClassMetrics {
    pub class: String,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: Option<f64>,
}

/// Summary metrics. AUC averages that need every class to have positives and
/// negatives are `None` when some class does not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_samples: usize,
    pub n_classes: usize,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub f1_micro: f64,
    pub f1_macro: f64,
    pub f1_weighted: f64,
    pub auc_micro: f64,
    pub auc_macro: Option<f64>,
    pub auc_weighted: Option<f64>,
    pub top_k_accuracy: BTreeMap<usize, f64>,
    pub per_class: Vec<PerClassMetrics>,
}

/// Computes the full report; top-k accuracy is reported for `k = 1..=max_k`
/// (capped at the number of classes).
pub fn evaluate(
    preds: &PredictionSet,
    class_names: &[String],
    max_k: usize,
) -> Result<MetricsReport, MetricsError> {
    let c = preds.n_classes();
    if class_names.len() != c {
        return Err(MetricsError::ClassNames {
            expected: c,
            found: class_names.len(),
        });
    }
    let f1 = f1_scores(preds);
    let per_class_auc = roc_auc_per_class(preds);
    let optional = |avg| match roc_auc(preds, avg) {
        Ok(v) => Some(v),
        Err(MetricsError::DegenerateClass(k)) => {
            warn!("{avg:?} AUC undefined: class {} lacks positives or negatives", class_names[k]);
            None
        }
        Err(e) => unreachable!("unexpected AUC error {e}"),
    };
    let top_k_accuracy = (1..=max_k.min(c))
        .map(|k| top_k_accuracy(preds, k).map(|v| (k, v)))
        .collect::<Result<_, _>>()?;
    let per_class = f1
        .per_class
        .iter()
        .zip(&per_class_auc)
        .zip(class_names)
        .map(|((s, &auc), name)| PerClassMetrics {
            class: name.clone(),
            support: s.support,
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
            auc,
        })
        .collect();
    Ok(MetricsReport {
        n_samples: preds.len(),
        n_classes: c,
        accuracy: accuracy(preds),
        balanced_accuracy: balanced_accuracy(preds),
        f1_micro: f1.micro,
        f1_macro: f1.macro_avg,
        f1_weighted: f1.weighted,
        auc_micro: roc_auc(preds, AucAveraging::Micro)?,
        auc_macro: optional(AucAveraging::Macro),
        auc_weighted: optional(AucAveraging::Weighted),
        top_k_accuracy,
        per_class,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

impl MetricsReport {
    /// Aligned text table: top-k accuracies, then F1 and AUC averages.
    pub fn to_table(&self, model_label: &str) -> String {
        let label_width = model_label.len().max(5);
        let mut groups: Vec<(&str, Vec<(String, String)>)> = Vec::new();
        groups.push((
            "Top-k Accuracy",
            self.top_k_accuracy
                .iter()
                .map(|(k, v)| (format!("k={k}"), cell(Some(*v))))
                .collect(),
        ));
        groups.push((
            "F1-Score",
            vec![
                ("Micro".into(), cell(Some(self.f1_micro))),
                ("Macro".into(), cell(Some(self.f1_macro))),
                ("Weighted".into(), cell(Some(self.f1_weighted))),
            ],
        ));
        groups.push((
            "AUC",
            vec![
                ("Micro".into(), cell(Some(self.auc_micro))),
                ("Macro".into(), cell(self.auc_macro)),
                ("Weighted".into(), cell(self.auc_weighted)),
            ],
        ));

        let mut top = format!("{:<label_width$}", "Model");
        let mut sub = format!("{:<label_width$}", "");
        let mut row = format!("{model_label:<label_width$}");
        for (title, cols) in &groups {
            let widths: Vec<usize> = cols.iter().map(|(h, _)| h.len().max(5)).collect();
            let span = widths.iter().sum::<usize>() + 2 * widths.len();
            let span = span.max(title.len() + 2);
            let _ = write!(top, "  {title:<w$}", w = span - 2);
            let mut used = 0;
            for ((h, v), w) in cols.iter().zip(&widths) {
                let _ = write!(sub, "  {h:>w$}");
                let _ = write!(row, "  {v:>w$}");
                used += w + 2;
            }
            if used < span {
                sub.push_str(&" ".repeat(span - used));
                row.push_str(&" ".repeat(span - used));
            }
        }
        let mut out = String::new();
        for line in [top, sub, row] {
            out.push_str(line.trim_end());
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "\naccuracy {:.3}  balanced accuracy {:.3}  n = {}",
            self.accuracy, self.balanced_accuracy, self.n_samples
        );
        out
    }
}

/// Per-class precision, recall, F1, AUC and support as CSV.
pub fn write_metrics_csv(path: &Path, report: &MetricsReport) -> Result<(), MetricsError> {
    let csv_err = |source| MetricsError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["class", "support", "precision", "recall", "f1", "auc"])
        .map_err(csv_err)?;
    for m in &report.per_class {
        w.write_record([
            m.class.clone(),
            m.support.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f1.to_string(),
            m.auc.map_or_else(String::new, |v| v.to_string()),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(c: usize) -> Vec<String> {
        (0..c).map(|i| format!("class_{i}")).collect()
    }

    #[test]
    fn perfect_report() {
        let p = PredictionSet::from_labels(vec![0, 1, 2, 2], &[0, 1, 2, 2], 3).unwrap();
        let r = evaluate(&p, &names(3), 4).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!((r.f1_micro, r.f1_macro, r.f1_weighted), (1.0, 1.0, 1.0));
        assert_eq!(r.auc_macro, Some(1.0));
        assert_eq!(r.top_k_accuracy.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(r.per_class[2].support, 2);
    }

    #[test]
    fn degenerate_auc_is_null_in_json() {
        let p = PredictionSet::from_labels(vec![0, 1], &[0, 1], 3).unwrap();
        let r = evaluate(&p, &names(3), 2).unwrap();
        assert_eq!(r.auc_macro, None);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["auc_macro"].is_null());
        assert_eq!(json["top_k_accuracy"]["1"], 1.0);
    }

    #[test]
    fn table_has_one_row_per_header_line() {
        let p = PredictionSet::new(
            vec![0, 1, 1],
            vec![vec![0.6, 0.4], vec![0.3, 0.7], vec![0.55, 0.45]],
        )
        .unwrap();
        let table = evaluate(&p, &names(2), 4).unwrap().to_table("TF-IDF");
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("Model"));
        assert!(lines[0].contains("Top-k Accuracy") && lines[0].contains("AUC"));
        assert!(lines[1].contains("k=2") && !lines[1].contains("k=3"));
        assert!(lines[2].starts_with("TF-IDF"));
        assert!(lines[2].contains("0.667"));
        // values are right-aligned under their headers
        let end = lines[1].find("k=1").unwrap() + 3;
        assert_eq!(&lines[2][end - 5..end], "0.667");
    }

    #[test]
    fn class_name_count_is_checked() {
        let p = PredictionSet::from_labels(vec![0, 1], &[0, 1], 2).unwrap();
        assert!(evaluate(&p, &names(3), 1).is_err());
    }
}
