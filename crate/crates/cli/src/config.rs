//! Run configuration: one TOML or JSON file plus `--set key=value` overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fundcat::corpus::{DatasetFormat, SplitSpec, SynthConfig};
use fundcat::explain::ExplainOptions;
use fundcat::featurize::Doc2VecParams;
use fundcat::preprocess::PreprocessConfig;
use fundcat::TrainConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset: PathBuf,
    /// Inferred from the dataset extension when absent.
    pub dataset_format: Option<String>,
    pub out_dir: PathBuf,
    pub preprocess: PreprocessSection,
    pub split: SplitSection,
    pub featurizer: FeaturizerConfig,
    pub train: TrainSection,
    pub evaluate: EvaluateSection,
    pub explain: ExplainSection,
    pub synth: SynthSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            dataset: PathBuf::from("data/corpus.jsonl"),
            dataset_format: None,
            out_dir: PathBuf::from("out"),
            preprocess: PreprocessSection::default(),
            split: SplitSection::default(),
            featurizer: FeaturizerConfig::default(),
            train: TrainSection::default(),
            evaluate: EvaluateSection::default(),
            explain: ExplainSection::default(),
            synth: SynthSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub lowercase: bool,
    pub filter_stopwords: bool,
    pub filter_non_alphabetic: bool,
    pub lemmatize: bool,
    pub ngram_min: usize,
    pub ngram_max: usize,
    /// Lexicon JSON replacing the bundled stopwords and lemma rules.
    pub lexicon: Option<PathBuf>,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        let c = PreprocessConfig::full();
        PreprocessSection {
            lowercase: c.lowercase,
            filter_stopwords: c.filter_stopwords,
            filter_non_alphabetic: c.filter_non_alphabetic,
            lemmatize: c.lemmatize,
            ngram_min: c.ngram_min,
            ngram_max: c.ngram_max,
            lexicon: None,
        }
    }
}

impl PreprocessSection {
    pub fn config(&self) -> PreprocessConfig {
        PreprocessConfig {
            lowercase: self.lowercase,
            filter_stopwords: self.filter_stopwords,
            filter_non_alphabetic: self.filter_non_alphabetic,
            lemmatize: self.lemmatize,
            ngram_min: self.ngram_min,
            ngram_max: self.ngram_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub test_fraction: f64,
    pub val_fraction_of_train: f64,
    /// Classes with fewer documents are dropped before splitting.
    pub min_per_class: usize,
}

impl Default for SplitSection {
    fn default() -> Self {
        let spec = SplitSpec::default();
        SplitSection {
            test_fraction: spec.test_fraction,
            val_fraction_of_train: spec.val_fraction_of_train,
            min_per_class: spec.min_per_class,
        }
    }
}

/// The featurizer choice and its parameters. Serialized into the model file
/// as the featurizer descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeaturizerConfig {
    Tfidf {
        #[serde(default = "one")]
        min_df: usize,
        #[serde(default)]
        max_features: Option<usize>,
    },
    Word2vecAvg {
        /// Word-vector text file: `<count> <dim>` header, then `<word> <v1> ...`.
        embeddings: PathBuf,
    },
    Doc2vec {
        #[serde(default = "d2v_dim")]
        dim: usize,
        #[serde(default = "d2v_window")]
        window: usize,
        #[serde(default = "d2v_epochs")]
        epochs: usize,
        #[serde(default = "d2v_negatives")]
        negatives: usize,
        #[serde(default = "d2v_learning_rate")]
        learning_rate: f64,
        #[serde(default = "d2v_min_count")]
        min_count: usize,
        #[serde(default = "d2v_infer_steps")]
        infer_steps: usize,
    },
    Precomputed {
        /// Line-delimited JSON `{"id": ..., "vector": [...]}`.
        embeddings: PathBuf,
    },
}

fn one() -> usize {
    1
}
fn d2v_dim() -> usize {
    Doc2VecParams::default().dim
}
fn d2v_window() -> usize {
    Doc2VecParams::default().window
}
fn d2v_epochs() -> usize {
    Doc2VecParams::default().epochs
}
fn d2v_negatives() -> usize {
    Doc2VecParams::default().negatives
}
fn d2v_learning_rate() -> f64 {
    Doc2VecParams::default().learning_rate
}
fn d2v_min_count() -> usize {
    Doc2VecParams::default().min_count
}
fn d2v_infer_steps() -> usize {
    20
}

impl Default for FeaturizerConfig {
    fn default() -> Self {
        FeaturizerConfig::Tfidf {
            min_df: 1,
            max_features: None,
        }
    }
}

impl FeaturizerConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            FeaturizerConfig::Tfidf { .. } => "tfidf",
            FeaturizerConfig::Word2vecAvg { .. } => "word2vec_avg",
            FeaturizerConfig::Doc2vec { .. } => "doc2vec",
            FeaturizerConfig::Precomputed { .. } => "precomputed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub lambda_grid: Vec<f64>,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection {
            lambda_grid: d.lambda_grid,
            max_iterations: d.max_iterations,
            gradient_tolerance: d.gradient_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    /// Largest k reported for top-k accuracy.
    pub max_k: usize,
    /// Restrict confusion CSVs to this many classes by support.
    pub top_classes: Option<usize>,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            max_k: 4,
            top_classes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSection {
    pub exact_threshold: usize,
    pub allow_expensive_featurizer: bool,
    /// Rows of the global importance table.
    pub top_tokens: usize,
    pub per_class: bool,
}

impl Default for ExplainSection {
    fn default() -> Self {
        let d = ExplainOptions::default();
        ExplainSection {
            exact_threshold: d.exact_threshold,
            allow_expensive_featurizer: d.allow_expensive_featurizer,
            top_tokens: 5,
            per_class: false,
        }
    }
}

impl ExplainSection {
    pub fn options(&self) -> ExplainOptions {
        ExplainOptions {
            exact_threshold: self.exact_threshold,
            allow_expensive_featurizer: self.allow_expensive_featurizer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub n_classes: usize,
    /// Documents per class; one entry applies to every class.
    pub docs_per_class: Vec<usize>,
    pub vocab_per_class: usize,
    pub shared_vocab: usize,
    pub doc_length: usize,
    pub signature_fraction: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let d = SynthConfig::default();
        SynthSection {
            n_classes: d.n_classes,
            docs_per_class: vec![d.docs_per_class[0]],
            vocab_per_class: d.vocab_per_class,
            shared_vocab: d.shared_vocab,
            doc_length: d.doc_length,
            signature_fraction: d.signature_fraction,
        }
    }
}

impl RunConfig {
    /// Reads `path` (or starts from defaults), applies `overrides` in order,
    /// then validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut tree = match path {
            Some(p) => read_tree(p)?,
            None => Value::Object(Default::default()),
        };
        for item in overrides {
            apply_override(&mut tree, item)?;
        }
        let cfg: RunConfig = serde_json::from_value(tree).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.config().validate()?;
        self.split_spec().validate()?;
        self.train_config().validate()?;
        if self.evaluate.max_k == 0 {
            bail!("evaluate.max_k must be positive");
        }
        if self.synth.docs_per_class.is_empty() {
            bail!("synth.docs_per_class must not be empty");
        }
        if let Some(f) = &self.dataset_format {
            f.parse::<DatasetFormat>()
                .map_err(|e| anyhow::anyhow!("dataset_format: {e}"))?;
        }
        Ok(())
    }

    pub fn dataset_format(&self) -> DatasetFormat {
        match &self.dataset_format {
            Some(f) => f.parse().expect("validated"),
            None => DatasetFormat::from_path(&self.dataset),
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            test_fraction: self.split.test_fraction,
            val_fraction_of_train: self.split.val_fraction_of_train,
            seed: stage_seed(self.seed, "split"),
            min_per_class: self.split.min_per_class,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lambda_grid: self.train.lambda_grid.clone(),
            max_iterations: self.train.max_iterations,
            gradient_tolerance: self.train.gradient_tolerance,
            seed: stage_seed(self.seed, "train"),
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        let s = &self.synth;
        let docs_per_class = if s.docs_per_class.len() == 1 {
            vec![s.docs_per_class[0]; s.n_classes]
        } else {
            s.docs_per_class.clone()
        };
        SynthConfig {
            n_classes: s.n_classes,
            docs_per_class,
            vocab_per_class: s.vocab_per_class,
            shared_vocab: s.shared_vocab,
            doc_length: s.doc_length,
            signature_fraction: s.signature_fraction,
            seed: stage_seed(self.seed, "synth"),
        }
    }

    pub fn splits_dir(&self) -> PathBuf {
        self.out_dir.join("splits")
    }
}

/// Per-stage seed derived from the run seed: a SplitMix64 step over the seed
/// mixed with an FNV-1a hash of the stage name.
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stage.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn read_tree(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let tree: Value = if is_json {
        serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("invalid TOML in {}", path.display()))?
    };
    if !tree.is_object() {
        bail!("config {} must be a table", path.display());
    }
    Ok(tree)
}

/// Applies `a.b.c=value`. The value is read as a TOML literal when it parses
/// as one and as a plain string otherwise.
fn apply_override(tree: &mut Value, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .with_context(|| format!("override {item:?} is not key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        bail!("override {item:?} has an empty key");
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|t| serde_json::to_value(&t["v"]).ok())
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let map = node
            .as_object_mut()
            .with_context(|| format!("override {key:?} descends into a non-table"))?;
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    node.as_object_mut()
        .with_context(|| format!("override {key:?} descends into a non-table"))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
