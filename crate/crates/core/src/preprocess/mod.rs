//! Rule-based text normalization: tokenization, lowercasing, stopword and
//! non-alphabetic filtering, lemmatization and n-gramming.

mod lexicon;

use std::ops::Deref;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::Lexicon;

/// Separator used to join n-gram constituents; never produced by [`tokenize`].
pub const NGRAM_JOINER: char = '_';

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("invalid preprocessing config: {0}")]
    InvalidConfig(String),
}

/// Ordered tokens; never contains empty strings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        Self(tokens.into_iter().filter(|t| !t.is_empty()).collect())
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }

    pub fn as_strs(&self) -> Vec<&str> {
        self.0.iter().map(String::as_str).collect()
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::new(iter.into_iter().map(Into::into).collect())
    }
}

/// Splits on every non-alphanumeric character; maximal alphanumeric runs
/// become tokens.
pub fn tokenize(text: &str) -> TokenSequence {
    TokenSequence(
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub filter_stopwords: bool,
    pub filter_non_alphabetic: bool,
    pub lemmatize: bool,
    pub ngram_min: usize,
    pub ngram_max: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self::identity()
    }
}

impl PreprocessConfig {
    /// Every step off, unigrams only.
    pub const fn identity() -> Self {
        Self {
            lowercase: false,
            filter_stopwords: false,
            filter_non_alphabetic: false,
            lemmatize: false,
            ngram_min: 1,
            ngram_max: 1,
        }
    }

    /// Full pipeline with unigrams and bigrams; used for TF-IDF.
    pub const fn full() -> Self {
        Self {
            lowercase: true,
            filter_stopwords: true,
            filter_non_alphabetic: true,
            lemmatize: true,
            ngram_min: 1,
            ngram_max: 2,
        }
    }

    /// Tokenize and lowercase only; used for the embedding featurizers.
    pub const fn light() -> Self {
        Self {
            lowercase: true,
            ..Self::identity()
        }
    }

    pub fn validate(&self) -> Result<(), PreprocessError> {
        if !(1 <= self.ngram_min && self.ngram_min <= self.ngram_max && self.ngram_max <= 3) {
            return Err(PreprocessError::InvalidConfig(format!(
                "need 1 <= ngram_min <= ngram_max <= 3, got ({}, {})",
                self.ngram_min, self.ngram_max
            )));
        }
        Ok(())
    }
}

/// Applies lowercasing, the non-alphabetic filter, the stopword filter and
/// lemmatization, in that order, each only if enabled.
pub fn normalize(seq: &TokenSequence, cfg: &PreprocessConfig, lex: &Lexicon) -> TokenSequence {
    let mut out = Vec::with_capacity(seq.len());
    for token in seq.iter() {
        let mut t = if cfg.lowercase {
            token.to_lowercase()
        } else {
            token.clone()
        };
        if cfg.filter_non_alphabetic && !t.chars().all(char::is_alphabetic) {
            continue;
        }
        if cfg.filter_stopwords {
            let hit = if cfg.lowercase {
                lex.is_stopword(&t)
            } else {
                lex.is_stopword(&t.to_lowercase())
            };
            if hit {
                continue;
            }
        }
        if cfg.lemmatize {
            t = lemmatize_token(&t, lex);
        }
        out.push(t);
    }
    TokenSequence(out)
}

/// Exception table first; otherwise the longest matching suffix rule is applied
/// once, provided the remaining stem keeps at least `min_stem_length` chars.
pub fn lemmatize_token(word: &str, lex: &Lexicon) -> String {
    if let Some(lemma) = lex.exception(word) {
        return lemma.to_owned();
    }
    let rule = lex
        .suffix_rules()
        .iter()
        .find(|(suffix, _)| word.ends_with(suffix.as_str()));
    if let Some((suffix, replacement)) = rule {
        let stem = &word[..word.len() - suffix.len()];
        if stem.chars().count() >= lex.min_stem_length() {
            return format!("{stem}{replacement}");
        }
    }
    word.to_owned()
}

/// Every contiguous window of `n` tokens for `n` in `n_min..=n_max`, joined by
/// [`NGRAM_JOINER`], grouped by `n` and in window order within a group.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], n_min: usize, n_max: usize) -> TokenSequence {
    let n_min = n_min.max(1);
    let k = tokens.len();
    let total: usize = (n_min..=n_max).map(|n| (k + 1).saturating_sub(n)).sum();
    let mut out = Vec::with_capacity(total);
    for n in n_min..=n_max {
        for window in tokens.windows(n) {
            let mut joined = String::from(window[0].as_ref());
            for t in &window[1..] {
                joined.push(NGRAM_JOINER);
                joined.push_str(t.as_ref());
            }
            out.push(joined);
        }
    }
    TokenSequence(out)
}

/// A configured preprocessing pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub config: PreprocessConfig,
    pub lexicon: Lexicon,
}

impl Preprocessor {
    pub fn new(config: PreprocessConfig, lexicon: Lexicon) -> Result<Self, PreprocessError> {
        config.validate()?;
        Ok(Self { config, lexicon })
    }

    /// Normalized unigram tokens, before n-gramming.
    pub fn unigrams(&self, text: &str) -> TokenSequence {
        normalize(&tokenize(text), &self.config, &self.lexicon)
    }

    /// The n-gram expansion configured for this pipeline.
    pub fn expand<S: AsRef<str>>(&self, unigrams: &[S]) -> TokenSequence {
        ngrams(unigrams, self.config.ngram_min, self.config.ngram_max)
    }

    pub fn process(&self, text: &str) -> TokenSequence {
        self.expand(&self.unigrams(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(tokens: &[&str]) -> TokenSequence {
        tokens.iter().copied().collect()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(*tokenize("S&P 500 index."), ["S", "P", "500", "index"]);
        assert_eq!(
            *tokenize("capital appreciation, income"),
            ["capital", "appreciation", "income"]
        );
        assert_eq!(*tokenize("ETF's  --  über"), ["ETF", "s", "über"]);
    }

    #[test]
    fn normalize_drops_stopwords_after_lowercasing() {
        let lex = Lexicon::default();
        let cfg = PreprocessConfig {
            lowercase: true,
            filter_stopwords: true,
            ..PreprocessConfig::identity()
        };
        assert_eq!(*normalize(&seq(&["The", "Fund"]), &cfg, &lex), ["fund"]);
        assert!(normalize(&seq(&["the", "of", "And"]), &cfg, &lex).is_empty());
    }

    #[test]
    fn identity_config_is_identity() {
        let lex = Lexicon::default();
        let s = seq(&["The", "S", "500", "Houses"]);
        assert_eq!(normalize(&s, &PreprocessConfig::identity(), &lex), s);
    }

    #[test]
    fn non_alphabetic_filter_drops_digits() {
        let lex = Lexicon::default();
        let cfg = PreprocessConfig {
            filter_non_alphabetic: true,
            ..PreprocessConfig::identity()
        };
        assert_eq!(*normalize(&seq(&["Russell", "2000", "x1"]), &cfg, &lex), ["Russell"]);
    }

    #[test]
    fn lemmatization_examples() {
        let lex = Lexicon::default();
        assert_eq!(lemmatize_token("houses", &lex), "house");
        assert_eq!(lemmatize_token("housing", &lex), "house");
        assert_eq!(lemmatize_token("bond", &lex), "bond");
        assert_eq!(lemmatize_token("bonds", &lex), "bond");
        assert_eq!(lemmatize_token("securities", &lex), "security");
        assert_eq!(lemmatize_token("classes", &lex), "class");
        assert_eq!(lemmatize_token("class", &lex), "class");
        assert_eq!(lemmatize_token("investing", &lex), "invest");
        assert_eq!(lemmatize_token("focus", &lex), "focus");
        // stem guard: "r" and "ga" are too short
        assert_eq!(lemmatize_token("ring", &lex), "ring");
        assert_eq!(lemmatize_token("gas", &lex), "gas");
    }

    #[test]
    fn ngram_examples() {
        assert_eq!(
            *ngrams(&["machine", "learning"], 1, 2),
            ["machine", "learning", "machine_learning"]
        );
        assert_eq!(*ngrams(&["a", "b", "c"], 2, 3), ["a_b", "b_c", "a_b_c"]);
        assert!(ngrams::<&str>(&[], 1, 2).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(PreprocessConfig::full().validate().is_ok());
        let bad = PreprocessConfig {
            ngram_min: 2,
            ngram_max: 1,
            ..PreprocessConfig::full()
        };
        assert!(bad.validate().is_err());
        let too_wide = PreprocessConfig {
            ngram_max: 4,
            ..PreprocessConfig::full()
        };
        assert!(too_wide.validate().is_err());
    }

    #[test]
    fn pipeline_for_tfidf() {
        let p = Preprocessor::new(PreprocessConfig::full(), Lexicon::default()).unwrap();
        assert_eq!(
            *p.process("The Fund invests in 500 Municipal bonds."),
            ["fund", "invest", "municipal", "bond", "fund_invest", "invest_municipal", "municipal_bond"]
        );
    }

    proptest! {
        #[test]
        fn ngram_count_formula(k in 0usize..12, lo in 1usize..4, extra in 0usize..3) {
            let hi = (lo + extra).min(3);
            let toks: Vec<String> = (0..k).map(|i| format!("t{i}")).collect();
            let expected: usize = (lo..=hi).map(|n| (k + 1).saturating_sub(n)).sum();
            prop_assert_eq!(ngrams(&toks, lo, hi).len(), expected);
        }

        #[test]
        fn unigram_ngrams_are_identity(toks in proptest::collection::vec("[a-z]{1,6}", 0..10)) {
            prop_assert_eq!(ngrams(&toks, 1, 1).into_vec(), toks);
        }

        #[test]
        fn tokenize_is_stable_on_its_own_output(text in "\\PC{0,60}") {
            let once = tokenize(&text);
            let again = tokenize(&once.join(" "));
            prop_assert_eq!(once, again);
        }

        #[test]
        fn tokens_never_empty(text in "\\PC{0,60}") {
            prop_assert!(tokenize(&text).iter().all(|t| !t.is_empty()));
        }

        #[test]
        fn lemmatizer_never_lengthens_outside_exceptions(word in "[a-z]{1,12}") {
            let lex = Lexicon::default();
            let lemma = lemmatize_token(&word, &lex);
            prop_assert!(!lemma.is_empty());
            if lex.exception(&word).is_none() {
                prop_assert!(lemma.len() <= word.len());
            }
        }
    }
}
