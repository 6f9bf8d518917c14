use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::classify::{train_logreg, LabeledFeatures, LogRegModel, TrainConfig};
use crate::corpus::{synth_corpus, Document, SynthConfig};
use crate::featurize::{FeatureVector, TfidfModel, TokenFeaturizer};
use crate::preprocess::{Lexicon, PreprocessConfig, Preprocessor};

fn tfidf(texts: &[&str]) -> TfidfModel {
    let pre = Preprocessor::new(PreprocessConfig::full(), Lexicon::default()).unwrap();
    TfidfModel::fit(texts, pre, 1, None).unwrap()
}

fn random_model(seed: u64, c: usize, d: usize) -> LogRegModel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (0..c).map(|i| format!("c{i}")).collect();
    let w = (0..c * d).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let b = (0..c).map(|_| rng.gen_range(-1.0..1.0)).collect();
    LogRegModel::from_parts(names, d, w, b).unwrap()
}

fn doc(id: &str, text: &str) -> Document {
    Document::new(id, text, "c0")
}

const TEXTS: [&str; 4] = [
    "bond fund municipal income tax exempt",
    "equity growth technology stocks",
    "money market liquidity treasury preservation",
    "emerging markets equity income",
];

#[test]
fn full_and_empty_coalitions_match_model() {
    let featurizer = tfidf(&TEXTS);
    let model = random_model(1, 3, featurizer.dimension());
    let text = "equity income fund with technology stocks";
    let tokens = TokenFeaturizer::<f64>::tokens(&featurizer, text).into_vec();
    let n = tokens.len();
    let game = make_value_function(&model, &featurizer, tokens, 2).unwrap();
    let x: FeatureVector<f64> = featurizer.featurize(text);
    assert_eq!(game.value(&Coalition::full(n)).unwrap(), model.log_odds(&x, 2).unwrap());
    let empty: FeatureVector<f64> = FeatureVector::Sparse(crate::featurize::SparseVector::empty(model.feature_dimension()));
    let bias_only = model.log_odds(&empty, 2).unwrap();
    assert_eq!(game.value(&Coalition::empty(n)).unwrap(), bias_only);
}

#[test]
fn out_of_vocabulary_tokens_are_dummies() {
    // unigram features only, so an unknown word cannot form a known bigram
    let pre = Preprocessor::new(PreprocessConfig::identity(), Lexicon::default()).unwrap();
    let uni = TfidfModel::fit(&TEXTS, pre, 1, None).unwrap();
    let model_uni = random_model(3, 3, uni.dimension());
    let tokens: Vec<String> = ["equity", "zzyzx", "growth", "stocks"].map(String::from).to_vec();
    let game = make_value_function(&model_uni, &uni, tokens, 0).unwrap();
    for mask in 0..16u64 {
        let s = Coalition::from_mask(4, mask);
        let mut without = s.clone();
        without.remove(1);
        assert_eq!(game.value(&s).unwrap(), game.value(&without).unwrap());
    }
    assert!(exact_shapley(&game).unwrap()[1].abs() < 1e-12);
}

#[test]
fn single_token_document() {
    let featurizer = tfidf(&TEXTS);
    let model = random_model(4, 3, featurizer.dimension());
    let e = explain_document(&model, &featurizer, &doc("d", "Technology!"), &Target::Class("c1".into()), &ExplainOptions::default())
        .unwrap();
    assert_eq!(e.tokens.len(), 1);
    assert_eq!(e.tokens[0].token, "technology");
    assert!((e.tokens[0].value - (e.v_full - e.v_empty)).abs() < 1e-15);
}

#[test]
fn long_document_uses_owen_and_is_efficient() {
    let featurizer = tfidf(&TEXTS);
    let model = random_model(5, 3, featurizer.dimension());
    let text = TEXTS.join(" ");
    let e = explain_document(&model, &featurizer, &doc("d", &text), &Target::Predicted, &ExplainOptions::default()).unwrap();
    assert_eq!(e.method, Method::Owen);
    assert!(e.tokens.len() > 12);
    let total: f64 = e.tokens.iter().map(|a| a.value).sum();
    assert!((total - (e.v_full - e.v_empty)).abs() < 1e-9);
    let x: FeatureVector<f64> = featurizer.featurize(&text);
    assert_eq!(e.target_class, model.class_names()[model.predict(&x).unwrap()]);

    let short = explain_document(&model, &featurizer, &doc("d", TEXTS[0]), &Target::Predicted, &ExplainOptions::default()).unwrap();
    assert_eq!(short.method, Method::Exact);
}

#[test]
fn explanations_are_deterministic_and_serializable() {
    let featurizer = tfidf(&TEXTS);
    let model = random_model(6, 3, featurizer.dimension());
    let d = doc("d", &TEXTS.join(" "));
    let a = explain_document(&model, &featurizer, &d, &Target::Predicted, &ExplainOptions::default()).unwrap();
    let b = explain_document(&model, &featurizer, &d, &Target::Predicted, &ExplainOptions::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let json = serde_json::to_value(&a).unwrap();
    for key in ["doc_id", "target_class", "tokens", "v_full", "v_empty"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!(json["tokens"][0].get("position").is_some());
}

#[test]
fn errors() {
    let featurizer = tfidf(&TEXTS);
    let model = random_model(7, 3, featurizer.dimension());
    let opts = ExplainOptions::default();
    assert!(matches!(
        explain_document(&model, &featurizer, &doc("d", "the and of"), &Target::Predicted, &opts),
        Err(ExplainError::EmptyDocument(_))
    ));
    assert!(matches!(
        explain_document(&model, &featurizer, &doc("d", "equity"), &Target::Class("nope".into()), &opts),
        Err(ExplainError::UnknownClass(_))
    ));
    let wrong = random_model(8, 3, featurizer.dimension() + 1);
    assert!(matches!(
        explain_document(&wrong, &featurizer, &doc("d", "equity"), &Target::Predicted, &opts),
        Err(ExplainError::Incompatible { .. })
    ));
    assert!(matches!(
        global_importance(&model, &featurizer, &[], false, &opts),
        Err(ExplainError::EmptyDataset)
    ));
}

#[test]
fn one_document_global_equals_local() {
    let featurizer = tfidf(&TEXTS);
    let model = random_model(9, 3, featurizer.dimension());
    let d = Document::new("d", "equity growth equity stocks", "c1");
    let g = global_importance(&model, &featurizer, std::slice::from_ref(&d), false, &ExplainOptions::default()).unwrap();
    let local = explain_document(&model, &featurizer, &d, &Target::Class("c1".into()), &ExplainOptions::default()).unwrap();
    assert_eq!(g.class_order, vec!["c1".to_string()]);
    let sums = &g.sums["c1"];
    let mut expected = std::collections::BTreeMap::new();
    for a in &local.tokens {
        *expected.entry(a.token.clone()).or_insert(0.0) += a.value;
    }
    assert_eq!(sums, &expected);
}

#[test]
fn table_csv_layout() {
    let g = GlobalImportance {
        n_documents: 2,
        per_class: false,
        class_order: vec!["b".into(), "a".into()],
        sums: [
            ("a".to_string(), [("x".to_string(), 1.0), ("y".to_string(), 1.0), ("z".to_string(), 3.0)].into()),
            ("b".to_string(), [("q".to_string(), -1.0)].into()),
        ]
        .into(),
    };
    assert_eq!(g.top_k("a", 2), vec![("z", 3.0), ("x", 1.0)]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    g.write_table_csv(&path, 3).unwrap();
    assert_eq!(std::fs::read_to_string(path).unwrap(), "b,a\nq,z\n,x\n,y\n");
}

/// Pearson correlation of average ranks.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn owen_tracks_shapley_on_softmax_games() {
    let mut total = 0.0;
    let games = 100;
    for seed in 0..games {
        let m = random_model(100 + seed, 3, 10);
        let game = TabulatedGame::from_fn(10, |s| {
            let x: Vec<f64> = (0..10).map(|i| if s.contains(i) { 1.0 } else { 0.0 }).collect();
            m.log_odds(&x.into(), 0).unwrap()
        });
        let exact = exact_shapley(&game).unwrap();
        let owen = owen_values(&game, &build_partition_tree(10)).unwrap();
        total += spearman(&exact, &owen);
    }
    let mean = total / games as f64;
    assert!(mean >= 0.9, "mean Spearman {mean}");
}

#[test]
fn planted_signatures_dominate() {
    let corpus = synth_corpus(&SynthConfig::balanced(4, 20, 3)).unwrap();
    let docs = corpus.dataset.documents();
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    let featurizer = tfidf(&texts);
    let xs: Vec<FeatureVector<f64>> = texts.iter().map(|t| featurizer.featurize(t)).collect();
    let ys: Vec<usize> = docs.iter().map(|d| corpus.dataset.label_index(&d.label).unwrap()).collect();
    let data = LabeledFeatures::new(&xs, &ys);
    let (model, _) = train_logreg(data, data, corpus.dataset.labels(), &TrainConfig::default()).unwrap();
    let opts = ExplainOptions::default();
    let g = global_importance(&model, &featurizer, &docs[..40], false, &opts).unwrap();
    for class in &g.class_order {
        let (top, _) = g.top_k(class, 1)[0];
        assert!(corpus.is_signature_of(class, top), "{class}: {top}");
    }
    let d = &docs[0];
    let e = explain_document(&model, &featurizer, d, &Target::Predicted, &opts).unwrap();
    assert!(corpus.is_signature_of(&d.label, &e.top().unwrap().token));
}

#[test]
fn f32_attributions_are_efficient() {
    let featurizer = tfidf(&TEXTS);
    let m = random_model(10, 3, featurizer.dimension());
    let w: Vec<f32> = m.weights().iter().map(|&v| v as f32).collect();
    let b: Vec<f32> = m.bias().iter().map(|&v| v as f32).collect();
    let model = LogRegModel::from_parts(m.class_names().to_vec(), m.feature_dimension(), w, b).unwrap();
    let e = explain_document(&model, &featurizer, &doc("d", &TEXTS.join(" ")), &Target::Predicted, &ExplainOptions::default())
        .unwrap();
    let total: f32 = e.tokens.iter().map(|a| a.value).sum();
    assert!((total - (e.v_full - e.v_empty)).abs() < 1e-4);
}
