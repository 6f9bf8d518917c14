//! Distributed bag-of-words paragraph vectors trained with negative sampling.
//!
//! Each document vector is trained to predict words sampled from a window
//! around every position of its document; output word vectors are shared
//! across documents. Training and inference are sequential and fully
//! determined by the seed.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FeatureVector, FeaturizeError, TokenFeaturizer};
use crate::preprocess::{Preprocessor, TokenSequence};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Doc2VecParams {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for Doc2VecParams {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 15,
            epochs: 40,
            negatives: 5,
            learning_rate: 0.025,
            min_count: 2,
            seed: 0,
        }
    }
}

impl Doc2VecParams {
    fn validate(&self) -> Result<(), FeaturizeError> {
        if self.dim == 0 || self.epochs == 0 || self.negatives == 0 || self.min_count == 0 {
            return Err(FeaturizeError::InvalidParameter(
                "dim, epochs, negatives and min_count must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(FeaturizeError::InvalidParameter("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Doc2VecModel<T> {
    pub params: Doc2VecParams,
    /// Retained words, lexicographic.
    pub vocabulary: Vec<String>,
    pub counts: Vec<usize>,
    /// Unigram^0.75 noise distribution over `vocabulary`.
    pub noise: Vec<T>,
    /// Row-major `n_docs x dim`.
    pub doc_vectors: Vec<T>,
    /// Row-major `vocabulary.len() x dim`.
    pub output_weights: Vec<T>,
    /// Mean negative-sampling loss per (document, position) pair, per epoch.
    pub epoch_losses: Vec<T>,
}

/// Linear decay from `lr0` to `lr0 / 10` over `total` steps.
fn decayed(lr0: f64, done: usize, total: usize) -> f64 {
    lr0 * (1.0 - 0.9 * done as f64 / total.max(1) as f64)
}

/// `ln(1 + e^x)` without overflow.
fn softplus<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

struct Sampler {
    noise: WeightedIndex<f64>,
}

impl<T: Scalar> Doc2VecModel<T> {
    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn n_docs(&self) -> usize {
        self.doc_vectors.len() / self.params.dim
    }

    pub fn doc_vector(&self, doc: usize) -> &[T] {
        let d = self.params.dim;
        &self.doc_vectors[doc * d..(doc + 1) * d]
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.vocabulary.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    fn ids<S: AsRef<str>>(&self, seq: &[S]) -> Vec<usize> {
        seq.iter().filter_map(|t| self.word_id(t.as_ref())).collect()
    }

    fn sampler(&self) -> Sampler {
        Sampler {
            noise: WeightedIndex::new(self.noise.iter().map(|p| p.to_f64_lossy()))
                .expect("noise distribution has positive mass"),
        }
    }

    /// One positive and `negatives` noise updates of `h` against `target`.
    /// Output vectors are updated unless `frozen`. Returns the pair's loss.
    #[allow(clippy::too_many_arguments)]
    fn train_pair(
        out: &mut [T],
        dim: usize,
        h: &mut [T],
        grad: &mut [T],
        target: usize,
        sampler: &Sampler,
        negatives: usize,
        lr: T,
        frozen: bool,
        rng: &mut ChaCha8Rng,
    ) -> T {
        grad.iter_mut().for_each(|g| *g = T::zero());
        let mut loss = T::zero();
        for k in 0..=negatives {
            let (word, label) = if k == 0 {
                (target, T::one())
            } else {
                let w = sampler.noise.sample(rng);
                if w == target {
                    continue;
                }
                (w, T::zero())
            };
            let u = &mut out[word * dim..(word + 1) * dim];
            let f = dot(h, u);
            loss += if k == 0 { softplus(-f) } else { softplus(f) };
            let g = (label - sigmoid(f)) * lr;
            for (gi, &ui) in grad.iter_mut().zip(u.iter()) {
                *gi += g * ui;
            }
            if !frozen {
                for (ui, &hi) in u.iter_mut().zip(h.iter()) {
                    *ui += g * hi;
                }
            }
        }
        for (hi, &gi) in h.iter_mut().zip(grad.iter()) {
            *hi += gi;
        }
        loss
    }

    /// A target position drawn uniformly from the window around `p`.
    fn window_target(p: usize, len: usize, window: usize, rng: &mut ChaCha8Rng) -> usize {
        let lo = p.saturating_sub(window);
        let hi = (p + window).min(len - 1);
        rng.gen_range(lo..=hi)
    }

    /// Infers a vector for an unseen document with the output weights frozen.
    pub fn infer<S: AsRef<str>>(&self, seq: &[S], steps: usize, seed: u64) -> Vec<T> {
        let dim = self.params.dim;
        let ids = self.ids(seq);
        if ids.is_empty() {
            log::warn!("document has no in-vocabulary tokens; using the zero vector");
            return vec![T::zero(); dim];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / dim as f64;
        let mut h: Vec<T> = (0..dim)
            .map(|_| T::lit((rng.gen::<f64>() - 0.5) * scale))
            .collect();
        let mut grad = vec![T::zero(); dim];
        // frozen, so a scratch copy is never written
        let mut out = self.output_weights.clone();
        let sampler = self.sampler();
        let total = steps * ids.len();
        let mut done = 0;
        for _ in 0..steps {
            for p in 0..ids.len() {
                let lr = T::lit(decayed(self.params.learning_rate, done, total));
                let t = ids[Self::window_target(p, ids.len(), self.params.window, &mut rng)];
                Self::train_pair(
                    &mut out,
                    dim,
                    &mut h,
                    &mut grad,
                    t,
                    &sampler,
                    self.params.negatives,
                    lr,
                    true,
                    &mut rng,
                );
                done += 1;
            }
        }
        h
    }
}

/// Trains document and output vectors on `train`. Words seen fewer than
/// `min_count` times are dropped; documents left empty keep their random
/// initial vector.
pub fn train_doc2vec_dbow<T: Scalar>(
    train: &[TokenSequence],
    params: &Doc2VecParams,
) -> Result<Doc2VecModel<T>, FeaturizeError> {
    params.validate()?;
    if train.is_empty() {
        return Err(FeaturizeError::InvalidParameter("no training documents".into()));
    }
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for seq in train {
        for t in seq.iter() {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let (vocabulary, counts): (Vec<String>, Vec<usize>) = freq
        .into_iter()
        .filter(|&(_, c)| c >= params.min_count)
        .map(|(w, c)| (w.to_owned(), c))
        .unzip();
    if vocabulary.is_empty() {
        return Err(FeaturizeError::EmptyVocabulary);
    }
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let mass: f64 = weights.iter().sum();
    let dim = params.dim;
    let mut model = Doc2VecModel {
        params: params.clone(),
        noise: weights.iter().map(|w| T::lit(w / mass)).collect(),
        output_weights: vec![T::zero(); vocabulary.len() * dim],
        doc_vectors: Vec::with_capacity(train.len() * dim),
        epoch_losses: Vec::with_capacity(params.epochs),
        vocabulary,
        counts,
    };

    let docs: Vec<Vec<usize>> = train.iter().map(|s| model.ids(s)).collect();
    for (i, d) in docs.iter().enumerate() {
        if d.is_empty() {
            log::warn!("training document {i} has no in-vocabulary tokens");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let scale = 1.0 / dim as f64;
    for _ in 0..train.len() * dim {
        model.doc_vectors.push(T::lit((rng.gen::<f64>() - 0.5) * scale));
    }

    let sampler = model.sampler();
    let per_epoch: usize = docs.iter().map(Vec::len).sum();
    let total = per_epoch * params.epochs;
    let mut done = 0;
    let mut grad = vec![T::zero(); dim];
    for _ in 0..params.epochs {
        let mut loss = T::zero();
        for (d, ids) in docs.iter().enumerate() {
            let h = &mut model.doc_vectors[d * dim..(d + 1) * dim];
            for p in 0..ids.len() {
                let lr = T::lit(decayed(params.learning_rate, done, total));
                let t = ids[Doc2VecModel::<T>::window_target(p, ids.len(), params.window, &mut rng)];
                loss += Doc2VecModel::train_pair(
                    &mut model.output_weights,
                    dim,
                    h,
                    &mut grad,
                    t,
                    &sampler,
                    params.negatives,
                    lr,
                    false,
                    &mut rng,
                );
                done += 1;
            }
        }
        model
            .epoch_losses
            .push(loss / T::from_count(per_epoch.max(1)));
    }
    Ok(model)
}

/// Embeds documents by dbow inference.
#[derive(Debug, Clone)]
pub struct Doc2VecEncoder<T> {
    pub model: Doc2VecModel<T>,
    pub preprocessor: Preprocessor,
    pub infer_steps: usize,
    pub seed: u64,
}

impl<T: Scalar> TokenFeaturizer<T> for Doc2VecEncoder<T> {
    fn dimension(&self) -> usize {
        self.model.dim()
    }

    fn tokens(&self, text: &str) -> TokenSequence {
        self.preprocessor.unigrams(text)
    }

    fn encode(&self, unigrams: &[&str]) -> FeatureVector<T> {
        FeatureVector::Dense(self.model.infer(unigrams, self.infer_steps, self.seed))
    }

    fn encode_is_expensive(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synth_corpus, SynthConfig};
    use crate::preprocess::{Lexicon, PreprocessConfig};
    use crate::scalar::cosine;

    fn planted(n_classes: usize, docs: usize, seed: u64) -> (Vec<TokenSequence>, Vec<usize>) {
        let cfg = SynthConfig {
            vocab_per_class: 30,
            shared_vocab: 20,
            ..SynthConfig::balanced(n_classes, docs, seed)
        };
        let corpus = synth_corpus(&cfg).unwrap();
        let p = Preprocessor::new(PreprocessConfig::light(), Lexicon::default()).unwrap();
        let seqs = corpus.dataset.documents().iter().map(|d| p.unigrams(&d.text)).collect();
        (seqs, corpus.dataset.class_indices())
    }

    fn small_params() -> Doc2VecParams {
        Doc2VecParams {
            dim: 32,
            epochs: 40,
            ..Doc2VecParams::default()
        }
    }

    #[test]
    fn default_parameters() {
        let p = Doc2VecParams::default();
        assert_eq!((p.dim, p.window, p.epochs, p.negatives), (100, 15, 40, 5));
    }

    #[test]
    fn training_is_deterministic() {
        let (seqs, _) = planted(2, 10, 1);
        let a: Doc2VecModel<f64> = train_doc2vec_dbow(&seqs, &small_params()).unwrap();
        let b: Doc2VecModel<f64> = train_doc2vec_dbow(&seqs, &small_params()).unwrap();
        assert_eq!(a.doc_vectors, b.doc_vectors);
        assert_eq!(a.output_weights, b.output_weights);
    }

    #[test]
    fn noise_distribution_sums_to_one() {
        let (seqs, _) = planted(2, 10, 2);
        let m: Doc2VecModel<f64> = train_doc2vec_dbow(&seqs, &small_params()).unwrap();
        let s: f64 = m.noise.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(m.doc_vectors.len(), seqs.len() * 32);
    }

    #[test]
    fn empty_vocabulary_rejected() {
        let seqs: Vec<TokenSequence> = vec![["a", "b"].into_iter().collect()];
        let err = train_doc2vec_dbow::<f64>(&seqs, &small_params()).unwrap_err();
        assert!(matches!(err, FeaturizeError::EmptyVocabulary));
    }

    #[test]
    fn classes_separate_in_vector_space() {
        let (seqs, classes) = planted(2, 20, 3);
        let m: Doc2VecModel<f64> = train_doc2vec_dbow(&seqs, &small_params()).unwrap();
        let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0, 0.0, 0);
        for i in 0..seqs.len() {
            for j in i + 1..seqs.len() {
                let c = cosine(m.doc_vector(i), m.doc_vector(j));
                if classes[i] == classes[j] {
                    intra += c;
                    ni += 1;
                } else {
                    inter += c;
                    nx += 1;
                }
            }
        }
        let (intra, inter) = (intra / ni as f64, inter / nx as f64);
        assert!(intra > inter, "intra {intra} <= inter {inter}");
    }

    #[test]
    fn late_epoch_loss_does_not_rise() {
        let (seqs, _) = planted(3, 15, 4);
        let m: Doc2VecModel<f64> = train_doc2vec_dbow(&seqs, &small_params()).unwrap();
        let half = m.epoch_losses.len() / 2;
        for w in m.epoch_losses[half..].windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{:?}", m.epoch_losses);
        }
    }

    #[test]
    fn inference_recovers_training_documents() {
        let (seqs, _) = planted(2, 20, 5);
        let m: Doc2VecModel<f64> = train_doc2vec_dbow(&seqs, &small_params()).unwrap();
        let mut hits = 0;
        for (i, s) in seqs.iter().enumerate() {
            let v = m.infer(s, 40, 17);
            let nearest = (0..m.n_docs())
                .max_by(|&a, &b| {
                    cosine(&v, m.doc_vector(a))
                        .partial_cmp(&cosine(&v, m.doc_vector(b)))
                        .unwrap()
                })
                .unwrap();
            hits += usize::from(nearest == i);
        }
        let rate = hits as f64 / seqs.len() as f64;
        assert!(rate >= 0.8, "self-retrieval rate {rate}");
    }

    #[test]
    fn inference_fallbacks_and_determinism() {
        let (seqs, _) = planted(2, 10, 6);
        let m: Doc2VecModel<f64> = train_doc2vec_dbow(&seqs, &small_params()).unwrap();
        assert_eq!(m.infer(&["unknownword"], 10, 1), vec![0.0; 32]);
        assert_eq!(m.infer(&seqs[0], 10, 9), m.infer(&seqs[0], 10, 9));
    }

    #[test]
    fn serialized_model_still_resolves_words() {
        let (seqs, _) = planted(2, 10, 7);
        let m: Doc2VecModel<f64> = train_doc2vec_dbow(&seqs, &small_params()).unwrap();
        let back: Doc2VecModel<f64> = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back.infer(&seqs[1], 5, 3), m.infer(&seqs[1], 5, 3));
    }
}
