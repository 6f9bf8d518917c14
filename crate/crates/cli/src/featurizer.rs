//! Fitting, applying and persisting the configured featurizer.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fundcat::corpus::Document;
use fundcat::featurize::{
    load_embedding_table, load_precomputed_embeddings, train_doc2vec_dbow, Doc2VecEncoder,
    Doc2VecModel, Doc2VecParams, DocEmbeddingStore, TfidfModel, WordAverager,
};
use fundcat::preprocess::{Lexicon, Preprocessor, TokenSequence};
use fundcat::{FeatureVector, TokenFeaturizer};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{stage_seed, FeaturizerConfig, RunConfig};

/// Fitted featurizer state as written to `featurizer.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeaturizerState {
    Tfidf {
        model: TfidfModel,
    },
    Word2vecAvg {
        embeddings: PathBuf,
        preprocessor: Preprocessor,
    },
    Doc2vec {
        model: Doc2VecModel<f64>,
        preprocessor: Preprocessor,
        infer_steps: usize,
        seed: u64,
    },
    Precomputed {
        embeddings: PathBuf,
    },
}

pub enum Featurizer {
    Tfidf(TfidfModel),
    WordAvg(WordAverager<f64>, PathBuf),
    Doc2Vec(Doc2VecEncoder<f64>),
    Precomputed(DocEmbeddingStore<f64>, PathBuf),
}

fn preprocessor(cfg: &RunConfig) -> Result<Preprocessor> {
    let lexicon = match &cfg.preprocess.lexicon {
        Some(p) => Lexicon::load(p)?,
        None => Lexicon::default(),
    };
    Ok(Preprocessor::new(cfg.preprocess.config(), lexicon)?)
}

fn load_store(path: &Path) -> Result<DocEmbeddingStore<f64>> {
    load_precomputed_embeddings(path)
        .with_context(|| format!("cannot load document embeddings {}", path.display()))
}

impl Featurizer {
    /// Fits on the training documents and returns their feature vectors.
    /// Doc2Vec returns its learned training vectors rather than inferred ones.
    pub fn fit(cfg: &RunConfig, train: &[Document]) -> Result<(Featurizer, Vec<FeatureVector<f64>>)> {
        let featurizer = match &cfg.featurizer {
            FeaturizerConfig::Tfidf { min_df, max_features } => {
                let texts: Vec<&str> = train.iter().map(|d| d.text.as_str()).collect();
                Featurizer::Tfidf(TfidfModel::fit(&texts, preprocessor(cfg)?, *min_df, *max_features)?)
            }
            FeaturizerConfig::Word2vecAvg { embeddings } => {
                let table = load_embedding_table(embeddings)
                    .with_context(|| format!("cannot load word vectors {}", embeddings.display()))?;
                Featurizer::WordAvg(
                    WordAverager {
                        table,
                        preprocessor: preprocessor(cfg)?,
                    },
                    embeddings.clone(),
                )
            }
            FeaturizerConfig::Doc2vec {
                dim,
                window,
                epochs,
                negatives,
                learning_rate,
                min_count,
                infer_steps,
            } => {
                let pre = preprocessor(cfg)?;
                let seqs: Vec<TokenSequence> = train.iter().map(|d| pre.unigrams(&d.text)).collect();
                let params = Doc2VecParams {
                    dim: *dim,
                    window: *window,
                    epochs: *epochs,
                    negatives: *negatives,
                    learning_rate: *learning_rate,
                    min_count: *min_count,
                    seed: stage_seed(cfg.seed, "doc2vec"),
                };
                let model = train_doc2vec_dbow(&seqs, &params)?;
                let xs = (0..train.len())
                    .map(|i| FeatureVector::Dense(model.doc_vector(i).to_vec()))
                    .collect();
                let encoder = Doc2VecEncoder {
                    model,
                    preprocessor: pre,
                    infer_steps: *infer_steps,
                    seed: stage_seed(cfg.seed, "doc2vec-infer"),
                };
                return Ok((Featurizer::Doc2Vec(encoder), xs));
            }
            FeaturizerConfig::Precomputed { embeddings } => {
                Featurizer::Precomputed(load_store(embeddings)?, embeddings.clone())
            }
        };
        let xs = featurizer.features(train)?;
        Ok((featurizer, xs))
    }

    pub fn features(&self, docs: &[Document]) -> Result<Vec<FeatureVector<f64>>> {
        match self {
            Featurizer::Precomputed(store, path) => {
                let missing = store.missing(docs.iter().map(|d| d.id.as_str()));
                if !missing.is_empty() {
                    bail!(
                        "{} documents have no embedding in {}: {}",
                        missing.len(),
                        path.display(),
                        missing.join(", ")
                    );
                }
                Ok(docs
                    .iter()
                    .map(|d| FeatureVector::Dense(store.get(&d.id).expect("checked").to_vec()))
                    .collect())
            }
            _ => {
                let f = self.token_featurizer().expect("token featurizer");
                Ok(docs.iter().map(|d| f.featurize(&d.text)).collect())
            }
        }
    }

    pub fn token_featurizer(&self) -> Option<&dyn TokenFeaturizer<f64>> {
        match self {
            Featurizer::Tfidf(m) => Some(m),
            Featurizer::WordAvg(m, _) => Some(m),
            Featurizer::Doc2Vec(m) => Some(m),
            Featurizer::Precomputed(..) => None,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Featurizer::Precomputed(store, _) => store.dimension(),
            _ => self.token_featurizer().expect("token featurizer").dimension(),
        }
    }

    /// Parameters echoed into the selection report.
    pub fn summary(&self) -> Value {
        match self {
            Featurizer::Tfidf(m) => json!({
                "kind": "tfidf",
                "vocabulary_size": m.vocabulary().len(),
                "training_documents": m.vocabulary().n_docs(),
            }),
            Featurizer::WordAvg(m, path) => json!({
                "kind": "word2vec_avg",
                "embeddings": path,
                "words": m.table.len(),
                "dimension": m.table.dimension(),
            }),
            Featurizer::Doc2Vec(e) => json!({
                "kind": "doc2vec",
                "params": e.model.params,
                "vocabulary_size": e.model.vocabulary.len(),
                "infer_steps": e.infer_steps,
                "final_epoch_loss": e.model.epoch_losses.last(),
            }),
            Featurizer::Precomputed(store, path) => json!({
                "kind": "precomputed",
                "embeddings": path,
                "documents": store.len(),
                "dimension": store.dimension(),
            }),
        }
    }

    fn state(&self) -> FeaturizerState {
        match self {
            Featurizer::Tfidf(m) => FeaturizerState::Tfidf { model: m.clone() },
            Featurizer::WordAvg(m, path) => FeaturizerState::Word2vecAvg {
                embeddings: path.clone(),
                preprocessor: m.preprocessor.clone(),
            },
            Featurizer::Doc2Vec(e) => FeaturizerState::Doc2vec {
                model: e.model.clone(),
                preprocessor: e.preprocessor.clone(),
                infer_steps: e.infer_steps,
                seed: e.seed,
            },
            Featurizer::Precomputed(_, path) => FeaturizerState::Precomputed {
                embeddings: path.clone(),
            },
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::write_json(path, &self.state())
    }

    pub fn load(path: &Path) -> Result<Featurizer> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read featurizer {}", path.display()))?;
        let state: FeaturizerState = serde_json::from_str(&text)
            .with_context(|| format!("invalid featurizer file {}", path.display()))?;
        Ok(match state {
            FeaturizerState::Tfidf { model } => Featurizer::Tfidf(model),
            FeaturizerState::Word2vecAvg {
                embeddings,
                preprocessor,
            } => {
                let table = load_embedding_table(&embeddings)
                    .with_context(|| format!("cannot load word vectors {}", embeddings.display()))?;
                Featurizer::WordAvg(WordAverager { table, preprocessor }, embeddings)
            }
            FeaturizerState::Doc2vec {
                model,
                preprocessor,
                infer_steps,
                seed,
            } => Featurizer::Doc2Vec(Doc2VecEncoder {
                model,
                preprocessor,
                infer_steps,
                seed,
            }),
            FeaturizerState::Precomputed { embeddings } => {
                Featurizer::Precomputed(load_store(&embeddings)?, embeddings)
            }
        })
    }
}
