use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::document::{attribute, check_featurizer};
use super::{make_value_function, ExplainError, ExplainOptions};
use crate::classify::LogRegModel;
use crate::corpus::Document;
use crate::featurize::TokenFeaturizer;
use crate::scalar::Scalar;

/// Signed attribution sums per class and token over a document collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub n_documents: usize,
    /// When set, each class was summed over its own documents only.
    pub per_class: bool,
    /// Classes in model order.
    pub class_order: Vec<String>,
    pub sums: BTreeMap<String, BTreeMap<String, f64>>,
}

impl GlobalImportance {
    /// The `k` tokens with the largest sums for `class`, ties in
    /// lexicographic order.
    pub fn top_k(&self, class: &str, k: usize) -> Vec<(&str, f64)> {
        let Some(tokens) = self.sums.get(class) else {
            return Vec::new();
        };
        let mut ranked: Vec<(&str, f64)> = tokens.iter().map(|(t, &v)| (t.as_str(), v)).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(k);
        ranked
    }

    /// One column per class, `k` rows of top tokens.
    pub fn write_table_csv(&self, path: &Path, k: usize) -> Result<(), ExplainError> {
        let csv_err = |source| ExplainError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.class_order).map_err(csv_err)?;
        let columns: Vec<Vec<(&str, f64)>> =
            self.class_order.iter().map(|c| self.top_k(c, k)).collect();
        for row in 0..k {
            let record = columns.iter().map(|col| col.get(row).map_or("", |(t, _)| *t));
            w.write_record(record).map_err(csv_err)?;
        }
        w.flush().map_err(|source| ExplainError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// One document's (class, token attributions) pair.
type ClassAttributions<T> = (usize, Vec<(String, T)>);

/// Explains every document against every class that occurs among the
/// documents' labels (or, with `per_class`, only against its own label) and
/// sums the signed attributions per class and token.
pub fn global_importance<T: Scalar>(
    model: &LogRegModel<T>,
    featurizer: &dyn TokenFeaturizer<T>,
    docs: &[Document],
    per_class: bool,
    options: &ExplainOptions,
) -> Result<GlobalImportance, ExplainError> {
    if docs.is_empty() {
        return Err(ExplainError::EmptyDataset);
    }
    check_featurizer(featurizer, options)?;
    let class_of = |label: &str| {
        model
            .class_names()
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| ExplainError::UnknownClass(label.to_string()))
    };
    let labels: Vec<usize> = docs.iter().map(|d| class_of(&d.label)).collect::<Result<_, _>>()?;
    let present: Vec<usize> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();

    let per_doc: Vec<Vec<ClassAttributions<T>>> = docs
        .par_iter()
        .zip(&labels)
        .map(|(doc, &label)| {
            let tokens = featurizer.tokens(&doc.text).into_vec();
            if tokens.is_empty() {
                return Err(ExplainError::EmptyDocument(doc.id.clone()));
            }
            let mut game = make_value_function(model, featurizer, tokens, label)?;
            let targets = if per_class { vec![label] } else { present.clone() };
            let mut out = Vec::with_capacity(targets.len());
            for class in targets {
                game.set_target(class)?;
                let (_, values) = attribute(&game, options)?;
                out.push((class, game.tokens().iter().cloned().zip(values).collect()));
            }
            Ok(out)
        })
        .collect::<Result<_, ExplainError>>()?;

    // fixed document order keeps the sums bitwise reproducible
    let mut sums: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for doc in per_doc {
        for (class, attributions) in doc {
            let entry = sums.entry(model.class_names()[class].clone()).or_default();
            for (token, value) in attributions {
                *entry.entry(token).or_insert(0.0) += value.to_f64_lossy();
            }
        }
    }
    info!("global importance over {} documents, {} classes", docs.len(), present.len());
    Ok(GlobalImportance {
        n_documents: docs.len(),
        per_class,
        class_order: present.iter().map(|&c| model.class_names()[c].clone()).collect(),
        sums,
    })
}
