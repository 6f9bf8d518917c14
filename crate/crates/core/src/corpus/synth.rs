use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset, Document};
use crate::preprocess::Lexicon;

/// Generator settings for a planted-vocabulary corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_classes: usize,
    pub docs_per_class: Vec<usize>,
    /// Size of each class's private signature vocabulary.
    pub vocab_per_class: usize,
    /// Size of the filler vocabulary shared by all classes.
    pub shared_vocab: usize,
    /// Nominal tokens per document; actual lengths vary by up to 20%.
    pub doc_length: usize,
    /// Share of each document's tokens drawn from its class signature (>= 0.4).
    pub signature_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_classes: 10,
            docs_per_class: vec![40; 10],
            vocab_per_class: 12,
            shared_vocab: 60,
            doc_length: 40,
            signature_fraction: 0.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// `n_classes` classes of `docs` documents each, other settings default.
    pub fn balanced(n_classes: usize, docs: usize, seed: u64) -> Self {
        Self {
            n_classes,
            docs_per_class: vec![docs; n_classes],
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: &str| Err(CorpusError::InvalidSynth(m.to_string()));
        if self.n_classes == 0 {
            return bad("n_classes must be positive");
        }
        if self.docs_per_class.len() != self.n_classes {
            return bad("docs_per_class needs one entry per class");
        }
        if self.docs_per_class.contains(&0) {
            return bad("docs_per_class entries must be positive");
        }
        if self.vocab_per_class == 0 || self.doc_length == 0 {
            return bad("vocab_per_class and doc_length must be positive");
        }
        if !(0.4..=1.0).contains(&self.signature_fraction) {
            return bad("signature_fraction must lie in [0.4, 1]");
        }
        Ok(())
    }
}

/// A generated dataset plus its ground truth.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub dataset: Dataset,
    /// Signature words keyed by label.
    pub signatures: BTreeMap<String, Vec<String>>,
    pub filler: Vec<String>,
}

impl SynthCorpus {
    pub fn is_signature_of(&self, label: &str, token: &str) -> bool {
        self.signatures
            .get(label)
            .is_some_and(|words| words.iter().any(|w| w == token))
    }
}

const FILLER_WORDS: &[&str] = &[
    "fund", "invest", "objective", "capital", "portfolio", "seek", "return", "total",
    "primarily", "securities", "normal", "circumstance", "net", "asset", "principal",
    "strategy", "company", "issuer", "market", "value", "income", "current", "long",
    "term", "risk", "manager", "adviser", "index", "benchmark", "exposure", "derivative",
    "instrument", "include", "common", "stock", "security", "investment", "grade",
    "rated", "maturity", "duration", "allocation", "country", "sector", "region",
    "selection", "research", "analysis", "liquidity", "management", "purpose", "hedging",
    "currency", "future", "option", "contract", "swap", "policy", "target", "level",
];

const CONSONANTS: &[u8] = b"bdfgklmnprtvz";
const VOWELS: &[u8] = b"aeiou";

/// Builds a pseudo-word that the bundled lemmatizer leaves unchanged (it
/// always ends in a vowel) and that is not a stopword.
fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(2..=3);
    let mut w = String::with_capacity(syllables * 2);
    for _ in 0..syllables {
        w.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
        w.push(VOWELS[rng.gen_range(0..VOWELS.len())] as char);
    }
    w
}

pub fn synth_corpus(cfg: &SynthConfig) -> Result<SynthCorpus, CorpusError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lexicon = Lexicon::default();
    let mut used: HashSet<String> = HashSet::new();

    let mut filler = Vec::with_capacity(cfg.shared_vocab);
    for w in FILLER_WORDS.iter().take(cfg.shared_vocab) {
        used.insert(w.to_string());
        filler.push(w.to_string());
    }
    let fresh = |rng: &mut ChaCha8Rng, used: &mut HashSet<String>| loop {
        let w = pseudo_word(rng);
        if !lexicon.is_stopword(&w) && used.insert(w.clone()) {
            break w;
        }
    };
    while filler.len() < cfg.shared_vocab {
        filler.push(fresh(&mut rng, &mut used));
    }

    let width = (cfg.n_classes.max(2) - 1).to_string().len().max(2);
    let labels: Vec<String> = (0..cfg.n_classes).map(|c| format!("class_{c:0width$}")).collect();
    let signatures: Vec<Vec<String>> = (0..cfg.n_classes)
        .map(|_| (0..cfg.vocab_per_class).map(|_| fresh(&mut rng, &mut used)).collect())
        .collect();

    let lo = ((cfg.doc_length as f64) * 0.8).ceil().max(1.0) as usize;
    let hi = ((cfg.doc_length as f64) * 1.2).floor().max(lo as f64) as usize;
    let mut docs = Vec::with_capacity(cfg.docs_per_class.iter().sum());
    for (c, &count) in cfg.docs_per_class.iter().enumerate() {
        for _ in 0..count {
            let len = rng.gen_range(lo..=hi);
            let n_sig = if filler.is_empty() {
                len
            } else {
                ((len as f64) * cfg.signature_fraction).ceil() as usize
            };
            let mut tokens: Vec<&str> = (0..len)
                .map(|i| {
                    if i < n_sig {
                        signatures[c].choose(&mut rng).unwrap().as_str()
                    } else {
                        filler.choose(&mut rng).unwrap().as_str()
                    }
                })
                .collect();
            tokens.shuffle(&mut rng);
            let mut text = String::with_capacity(len * 8);
            for (i, t) in tokens.iter().enumerate() {
                if i > 0 {
                    text.push_str(if rng.gen_bool(0.08) { ", " } else { " " });
                }
                text.push_str(t);
            }
            text.push('.');
            docs.push(Document::new(format!("doc{:05}", docs.len()), text, labels[c].clone()));
        }
    }

    Ok(SynthCorpus {
        dataset: Dataset::new(docs)?,
        signatures: labels.into_iter().zip(signatures).collect(),
        filler,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{lemmatize_token, tokenize};

    #[test]
    fn counts_match_request() {
        let cfg = SynthConfig {
            n_classes: 2,
            docs_per_class: vec![20, 20],
            ..SynthConfig::default()
        };
        let s = synth_corpus(&cfg).unwrap();
        assert_eq!(s.dataset.len(), 40);
        assert_eq!(s.dataset.labels().len(), 2);
    }

    #[test]
    fn without_filler_every_token_is_a_signature_word() {
        let cfg = SynthConfig {
            n_classes: 3,
            docs_per_class: vec![5, 5, 5],
            shared_vocab: 0,
            ..SynthConfig::default()
        };
        let s = synth_corpus(&cfg).unwrap();
        for d in s.dataset.documents() {
            for t in tokenize(&d.text).iter() {
                assert!(s.is_signature_of(&d.label, t), "{t} not in signature of {}", d.label);
            }
        }
    }

    #[test]
    fn signature_share_is_at_least_forty_percent() {
        let s = synth_corpus(&SynthConfig::default()).unwrap();
        for d in s.dataset.documents() {
            let toks = tokenize(&d.text);
            let sig = toks.iter().filter(|t| s.is_signature_of(&d.label, t)).count();
            assert!(sig * 10 >= toks.len() * 4);
        }
    }

    #[test]
    fn default_mean_length_is_prospectus_sized() {
        let s = synth_corpus(&SynthConfig::default()).unwrap();
        let mean = s.dataset.documents().iter().map(|d| d.text.chars().count()).sum::<usize>() as f64
            / s.dataset.len() as f64;
        assert!((250.0..=350.0).contains(&mean), "mean length {mean}");
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = synth_corpus(&SynthConfig::default()).unwrap();
        let b = synth_corpus(&SynthConfig::default()).unwrap();
        assert_eq!(a.dataset, b.dataset);
        let c = synth_corpus(&SynthConfig {
            seed: 1,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn signatures_are_disjoint_and_survive_lemmatization() {
        let s = synth_corpus(&SynthConfig::default()).unwrap();
        let lex = Lexicon::default();
        let mut all = HashSet::new();
        for words in s.signatures.values() {
            for w in words {
                assert!(all.insert(w.clone()));
                assert_eq!(lemmatize_token(w, &lex), *w);
                assert!(!lex.is_stopword(w));
            }
        }
        assert!(s.filler.iter().all(|f| !all.contains(f)));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let cfg = SynthConfig {
            n_classes: 3,
            docs_per_class: vec![1, 2],
            ..SynthConfig::default()
        };
        assert!(matches!(synth_corpus(&cfg), Err(CorpusError::InvalidSynth(_))));
    }
}
