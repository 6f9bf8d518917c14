use serde::{Deserialize, Serialize};

use super::{MetricsError, PredictionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucAveraging {
    /// One AUC over all pooled (sample, class) one-vs-rest instances.
    Micro,
    /// Unweighted mean of per-class one-vs-rest AUCs.
    Macro,
    /// Support-weighted mean of per-class one-vs-rest AUCs.
    Weighted,
    /// Mean AUC over ordered class pairs, each restricted to the two classes.
    OneVsOne,
}

/// Binary AUC by midranks: equal scores count one half.
/// Returns `None` when either side is empty.
pub(crate) fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum keeps midranks integral
    let mut rank2_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank2 = (i + 1 + j + 1) as u128;
        let pos_in_block = order[i..=j].iter().filter(|&&k| positive[k]).count() as u128;
        rank2_sum += midrank2 * pos_in_block;
        i = j + 1;
    }
    let p = n_pos as u128;
    // U statistic doubled: 2*sum(ranks) - P(P+1), an integer
    let u2 = rank2_sum - p * (p + 1);
    Some(u2 as f64 / (2 * n_pos * n_neg) as f64)
}

/// One-vs-rest AUC per class; `None` for classes without positives or
/// without negatives.
pub fn roc_auc_per_class(preds: &PredictionSet) -> Vec<Option<f64>> {
    let c = preds.n_classes();
    (0..c)
        .map(|k| {
            let scores: Vec<f64> = (0..preds.len()).map(|i| preds.row(i)[k]).collect();
            let positive: Vec<bool> = preds.true_labels().iter().map(|&y| y == k).collect();
            binary_auc(&scores, &positive)
        })
        .collect()
}

pub fn roc_auc(preds: &PredictionSet, averaging: AucAveraging) -> Result<f64, MetricsError> {
    let c = preds.n_classes();
    match averaging {
        AucAveraging::Micro => {
            let mut scores = Vec::with_capacity(preds.len() * c);
            let mut positive = Vec::with_capacity(preds.len() * c);
            for (i, &y) in preds.true_labels().iter().enumerate() {
                for (k, &p) in preds.row(i).iter().enumerate() {
                    scores.push(p);
                    positive.push(k == y);
                }
            }
            // n positives and n(C-1) negatives, never degenerate for C >= 2
            Ok(binary_auc(&scores, &positive).expect("pooled set has both sides"))
        }
        AucAveraging::Macro | AucAveraging::Weighted => {
            let per_class = roc_auc_per_class(preds);
            let support = preds.supports();
            let mut total = 0.0;
            for (k, auc) in per_class.iter().enumerate() {
                let auc = auc.ok_or(MetricsError::DegenerateClass(k))?;
                total += match averaging {
                    AucAveraging::Macro => auc,
                    _ => auc * support[k] as f64,
                };
            }
            Ok(match averaging {
                AucAveraging::Macro => total / c as f64,
                _ => total / preds.len() as f64,
            })
        }
        AucAveraging::OneVsOne => {
            let support = preds.supports();
            if let Some(k) = support.iter().position(|&s| s == 0) {
                return Err(MetricsError::DegenerateClass(k));
            }
            let mut total = 0.0;
            for a in 0..c {
                for b in (0..c).filter(|&b| b != a) {
                    let (scores, positive): (Vec<f64>, Vec<bool>) = preds
                        .true_labels()
                        .iter()
                        .enumerate()
                        .filter(|&(_, &y)| y == a || y == b)
                        .map(|(i, &y)| (preds.row(i)[a], y == a))
                        .unzip();
                    total += binary_auc(&scores, &positive).expect("both classes present");
                }
            }
            Ok(total / (c * (c - 1)) as f64)
        }
    }
}
