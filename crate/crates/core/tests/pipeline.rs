use fundcat::classify::{train_logreg, LabeledFeatures, TrainConfig};
use fundcat::corpus::{stratified_split, synth_corpus, SplitSpec, SynthConfig};
use fundcat::explain::{explain_document, ExplainOptions, Target};
use fundcat::featurize::TfidfModel;
use fundcat::metrics::{evaluate, PredictionSet};
use fundcat::preprocess::{Lexicon, PreprocessConfig};
use fundcat::{Dataset, FeatureVector, LogRegModel, Preprocessor, Scalar, TokenFeaturizer};

fn encode<T: Scalar>(f: &TfidfModel, d: &Dataset) -> (Vec<FeatureVector<T>>, Vec<usize>) {
    let xs = d.documents().iter().map(|x| f.featurize(&x.text)).collect();
    (xs, d.class_indices())
}

fn run<T: Scalar>(seed: u64) -> (LogRegModel<T>, f64) {
    let corpus = synth_corpus(&SynthConfig::balanced(5, 30, seed)).unwrap();
    let spec = SplitSpec {
        seed,
        ..SplitSpec::default()
    };
    let s = stratified_split(&corpus.dataset, &spec).unwrap();
    let texts: Vec<&str> = s.train.documents().iter().map(|d| d.text.as_str()).collect();
    let pre = Preprocessor::new(PreprocessConfig::full(), Lexicon::default()).unwrap();
    let tfidf = TfidfModel::fit(&texts, pre, 1, None).unwrap();
    let (tx, ty) = encode::<T>(&tfidf, &s.train);
    let (vx, vy) = encode::<T>(&tfidf, &s.validation);
    let (model, report) = train_logreg(
        LabeledFeatures::new(&tx, &ty),
        LabeledFeatures::new(&vx, &vy),
        s.train.labels(),
        &TrainConfig::default(),
    )
    .unwrap();
    assert_eq!(report.grid.len(), 5);

    let (sx, sy) = encode::<T>(&tfidf, &s.test);
    let probs: Vec<_> = sx.iter().map(|x| model.predict_proba(x).unwrap()).collect();
    let preds = PredictionSet::from_prob_vectors(sy, &probs).unwrap();
    let metrics = evaluate(&preds, model.class_names(), 3).unwrap();

    let doc = &s.test.documents()[0];
    let e = explain_document(&model, &tfidf, doc, &Target::Predicted, &ExplainOptions::default()).unwrap();
    let total = e.tokens.iter().fold(T::zero(), |a, t| a + t.value);
    let residual = (total - (e.v_full - e.v_empty)).to_f64_lossy().abs();
    assert!(residual < 1e-4, "residual {residual}");
    (model, metrics.accuracy)
}

#[test]
fn double_precision_pipeline() {
    let (model, acc) = run::<f64>(1);
    assert!(acc >= 0.95, "accuracy {acc}");
    let json = serde_json::to_string(&model).unwrap();
    let back: LogRegModel<f64> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, model);
}

#[test]
fn single_precision_pipeline() {
    let (_, acc) = run::<f32>(2);
    assert!(acc >= 0.95, "accuracy {acc}");
}
