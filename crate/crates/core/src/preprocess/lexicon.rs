use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PreprocessError;

const BUNDLED: &str = include_str!("../../data/lexicon.json");

fn default_min_stem() -> usize {
    3
}

/// Stopwords and lemmatization resources.
///
/// Suffix rules are kept sorted longest-suffix-first; only the longest
/// matching rule is ever considered for a word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLexicon", into = "RawLexicon")]
pub struct Lexicon {
    stopwords: BTreeSet<String>,
    lemma_exceptions: BTreeMap<String, String>,
    suffix_rules: Vec<(String, String)>,
    min_stem_length: usize,
}

#[derive(Serialize, Deserialize)]
struct RawLexicon {
    stopwords: Vec<String>,
    #[serde(default)]
    lemma_exceptions: BTreeMap<String, String>,
    #[serde(default)]
    suffix_rules: Vec<(String, String)>,
    #[serde(default = "default_min_stem")]
    min_stem_length: usize,
}

impl TryFrom<RawLexicon> for Lexicon {
    type Error = PreprocessError;

    fn try_from(raw: RawLexicon) -> Result<Self, Self::Error> {
        Lexicon::new(
            raw.stopwords,
            raw.lemma_exceptions,
            raw.suffix_rules,
            raw.min_stem_length,
        )
    }
}

impl From<Lexicon> for RawLexicon {
    fn from(lex: Lexicon) -> Self {
        RawLexicon {
            stopwords: lex.stopwords.into_iter().collect(),
            lemma_exceptions: lex.lemma_exceptions,
            suffix_rules: lex.suffix_rules,
            min_stem_length: lex.min_stem_length,
        }
    }
}

impl Default for Lexicon {
    /// The bundled English lexicon.
    fn default() -> Self {
        serde_json::from_str(BUNDLED).expect("bundled lexicon is valid")
    }
}

impl Lexicon {
    pub fn new(
        stopwords: impl IntoIterator<Item = String>,
        lemma_exceptions: BTreeMap<String, String>,
        mut suffix_rules: Vec<(String, String)>,
        min_stem_length: usize,
    ) -> Result<Self, PreprocessError> {
        if min_stem_length == 0 {
            return Err(PreprocessError::InvalidLexicon(
                "min_stem_length must be >= 1".into(),
            ));
        }
        for (suffix, replacement) in &suffix_rules {
            if suffix.is_empty() {
                return Err(PreprocessError::InvalidLexicon("empty suffix rule".into()));
            }
            if replacement.chars().count() > suffix.chars().count() {
                return Err(PreprocessError::InvalidLexicon(format!(
                    "rule {suffix:?} -> {replacement:?} would lengthen words"
                )));
            }
        }
        if let Some((w, _)) = lemma_exceptions.iter().find(|(_, lemma)| lemma.is_empty()) {
            return Err(PreprocessError::InvalidLexicon(format!(
                "empty lemma for {w:?}"
            )));
        }
        // stable: equal-length suffixes keep file order
        suffix_rules.sort_by_key(|(s, _)| std::cmp::Reverse(s.chars().count()));
        Ok(Self {
            stopwords: stopwords.into_iter().map(|s| s.to_lowercase()).collect(),
            lemma_exceptions,
            suffix_rules,
            min_stem_length,
        })
    }

    pub fn load(path: &Path) -> Result<Self, PreprocessError> {
        let text = std::fs::read_to_string(path).map_err(|source| PreprocessError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| PreprocessError::InvalidLexicon(e.to_string()))
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    pub fn stopwords(&self) -> impl Iterator<Item = &str> {
        self.stopwords.iter().map(String::as_str)
    }

    pub fn exception(&self, word: &str) -> Option<&str> {
        self.lemma_exceptions.get(word).map(String::as_str)
    }

    pub fn suffix_rules(&self) -> &[(String, String)] {
        &self.suffix_rules
    }

    pub fn min_stem_length(&self) -> usize {
        self.min_stem_length
    }
}
