//! The five subcommands. Every output is a pure function of the config.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fundcat::classify::{train_logreg, LabeledFeatures};
use fundcat::corpus::{
    clean_dataset, load_dataset, stratified_split, synth_corpus, write_dataset, Dataset,
    DatasetFormat, Document,
};
use fundcat::explain::{explain_document, global_importance, Target};
use fundcat::metrics::{evaluate, write_confusion_csv, write_metrics_csv, Normalization};
use fundcat::{LogRegModel, PredictionSet};
use log::{info, warn};
use serde_json::{json, Value};

use crate::config::{FeaturizerConfig, RunConfig};
use crate::featurizer::Featurizer;
use crate::{write_json, write_text};

pub const SPLIT_FILES: [&str; 3] = ["train.jsonl", "validation.jsonl", "test.jsonl"];

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub fn cmd_split(cfg: &RunConfig) -> Result<()> {
    let loaded = load_dataset(&cfg.dataset, cfg.dataset_format())?;
    if loaded.dropped > 0 {
        warn!("dropped {} records with missing text or label", loaded.dropped);
    }
    let spec = cfg.split_spec();
    let cleaned = clean_dataset(&loaded.dataset, spec.min_per_class)?;
    let removed = loaded.dataset.labels().len() - cleaned.labels().len();
    if removed > 0 {
        info!("removed {removed} classes with fewer than {} documents", spec.min_per_class);
    }
    let splits = stratified_split(&cleaned, &spec)?;
    let dir = cfg.splits_dir();
    ensure_dir(&dir)?;
    for (name, ds) in SPLIT_FILES.iter().zip([&splits.train, &splits.validation, &splits.test]) {
        write_dataset(&dir.join(name), ds)?;
    }
    let summary = splits.summary(&spec);
    write_json(&dir.join("split_summary.json"), &summary)?;
    println!(
        "split {} documents in {} classes: train {}, validation {}, test {} -> {}",
        cleaned.len(),
        cleaned.labels().len(),
        summary.totals.train,
        summary.totals.validation,
        summary.totals.test,
        dir.display()
    );
    Ok(())
}

fn load_split(cfg: &RunConfig, name: &str) -> Result<Dataset> {
    let path = cfg.splits_dir().join(name);
    if !path.exists() {
        bail!("split file {} not found; run `fundcat split` first", path.display());
    }
    Ok(load_dataset(&path, DatasetFormat::Jsonl)?.dataset)
}

fn class_indices(docs: &[Document], class_names: &[String]) -> Result<Vec<usize>> {
    docs.iter()
        .map(|d| {
            class_names
                .binary_search(&d.label)
                .ok()
                .or_else(|| class_names.iter().position(|c| *c == d.label))
                .with_context(|| {
                    format!("class-set mismatch: document {:?} has label {:?} unknown to the model", d.id, d.label)
                })
        })
        .collect()
}

pub fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let train = load_split(cfg, SPLIT_FILES[0])?;
    let validation = load_split(cfg, SPLIT_FILES[1])?;
    let class_names = train.labels().to_vec();
    let (featurizer, train_x) = Featurizer::fit(cfg, train.documents())?;
    let val_x = featurizer.features(validation.documents())?;
    let train_y = class_indices(train.documents(), &class_names)?;
    let val_y = class_indices(validation.documents(), &class_names)?;
    let (model, report) = train_logreg(
        LabeledFeatures::new(&train_x, &train_y),
        LabeledFeatures::new(&val_x, &val_y),
        &class_names,
        &cfg.train_config(),
    )?;

    ensure_dir(&cfg.out_dir)?;
    save_model(&cfg.out_dir.join("model.json"), &model, &cfg.featurizer)?;
    featurizer.save(&cfg.out_dir.join("featurizer.json"))?;
    let selection = json!({
        "featurizer": featurizer.summary(),
        "train_documents": train.len(),
        "validation_documents": validation.len(),
        "grid": report.grid,
        "selected_index": report.selected_index,
        "selected_lambda": report.selected_lambda,
    });
    write_json(&cfg.out_dir.join("selection_report.json"), &selection)?;
    for p in &report.grid {
        println!(
            "lambda {:<8} validation micro-F1 {:.4}  iterations {}{}",
            p.lambda,
            p.validation_micro_f1,
            p.iterations,
            if p.converged { "" } else { " (not converged)" }
        );
    }
    println!("selected lambda {} -> {}", report.selected_lambda, cfg.out_dir.join("model.json").display());
    Ok(())
}

/// Writes the model JSON with the featurizer descriptor alongside.
pub fn save_model(path: &Path, model: &LogRegModel<f64>, featurizer: &FeaturizerConfig) -> Result<()> {
    let mut value = serde_json::to_value(model)?;
    value
        .as_object_mut()
        .expect("model serializes to an object")
        .insert("featurizer".into(), serde_json::to_value(featurizer)?);
    write_json(path, &value)
}

pub fn load_model(path: &Path) -> Result<(LogRegModel<f64>, FeaturizerConfig)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read model {}; run `fundcat train` first", path.display()))?;
    let mut value: Value =
        serde_json::from_str(&text).with_context(|| format!("invalid model file {}", path.display()))?;
    let descriptor = value
        .as_object_mut()
        .and_then(|m| m.remove("featurizer"))
        .with_context(|| format!("model file {} lacks a featurizer descriptor", path.display()))?;
    let model = serde_json::from_value(value).with_context(|| format!("invalid model file {}", path.display()))?;
    let descriptor = serde_json::from_value(descriptor)
        .with_context(|| format!("invalid featurizer descriptor in {}", path.display()))?;
    Ok((model, descriptor))
}

fn load_artifacts(cfg: &RunConfig, model_path: Option<&Path>) -> Result<(LogRegModel<f64>, Featurizer, PathBuf)> {
    let model_path = model_path.map_or_else(|| cfg.out_dir.join("model.json"), Path::to_path_buf);
    let (model, descriptor) = load_model(&model_path)?;
    let featurizer_path = model_path.with_file_name("featurizer.json");
    let featurizer = Featurizer::load(&featurizer_path)?;
    if descriptor.kind() != featurizer.summary()["kind"] {
        bail!(
            "model was trained with a {} featurizer but {} holds another kind",
            descriptor.kind(),
            featurizer_path.display()
        );
    }
    if featurizer.dimension() != model.feature_dimension() {
        bail!(
            "model expects {} features, featurizer produces {}",
            model.feature_dimension(),
            featurizer.dimension()
        );
    }
    Ok((model, featurizer, model_path))
}

pub fn cmd_evaluate(cfg: &RunConfig, model_path: Option<&Path>, top_classes: Option<usize>) -> Result<()> {
    let (model, featurizer, _) = load_artifacts(cfg, model_path)?;
    let test = load_split(cfg, SPLIT_FILES[2])?;
    let y = class_indices(test.documents(), model.class_names())?;
    let xs = featurizer.features(test.documents())?;
    let probs = xs.iter().map(|x| model.predict_proba(x)).collect::<Result<Vec<_>, _>>()?;
    let preds = PredictionSet::from_prob_vectors(y, &probs)?;
    let report = evaluate(&preds, model.class_names(), cfg.evaluate.max_k)?;

    let out = &cfg.out_dir;
    ensure_dir(out)?;
    write_json(&out.join("metrics.json"), &report)?;
    let table = report.to_table(cfg.featurizer.kind());
    write_text(&out.join("metrics.txt"), &table)?;
    write_metrics_csv(&out.join("metrics_per_class.csv"), &report)?;
    let matrix = fundcat::metrics::confusion_matrix(&preds);
    let subset = top_classes.or(cfg.evaluate.top_classes).map(|k| matrix.top_by_support(k));
    for (name, norm) in [
        ("confusion_counts.csv", Normalization::Counts),
        ("confusion_normalized.csv", Normalization::Rows),
    ] {
        write_confusion_csv(&out.join(name), model.class_names(), &matrix, norm, subset.as_deref())?;
    }
    print!("{table}");
    Ok(())
}

pub enum ExplainTarget {
    Document { id: String, class: Option<String> },
    Global,
}

fn file_safe(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

pub fn cmd_explain(cfg: &RunConfig, model_path: Option<&Path>, target: &ExplainTarget) -> Result<()> {
    let (model, featurizer, _) = load_artifacts(cfg, model_path)?;
    let Some(token_featurizer) = featurizer.token_featurizer() else {
        bail!("precomputed document embeddings have no tokens to attribute");
    };
    let options = cfg.explain.options();
    match target {
        ExplainTarget::Document { id, class } => {
            let mut doc = None;
            for name in [SPLIT_FILES[2], SPLIT_FILES[1], SPLIT_FILES[0]] {
                if let Some(d) = load_split(cfg, name)?.get(id) {
                    doc = Some(d.clone());
                    break;
                }
            }
            let doc = doc.with_context(|| format!("unknown document id {id:?}"))?;
            let target = class.clone().map_or(Target::Predicted, Target::Class);
            let e = explain_document(&model, token_featurizer, &doc, &target, &options)?;
            let total: f64 = e.tokens.iter().map(|a| a.value).sum();
            let residual = (total - (e.v_full - e.v_empty)).abs();
            let mut value = serde_json::to_value(&e)?;
            value
                .as_object_mut()
                .expect("explanation serializes to an object")
                .insert("efficiency_residual".into(), json!(residual));
            let path = cfg.out_dir.join("explanations").join(format!("{}.json", file_safe(id)));
            write_json(&path, &value)?;
            let mut ranked: Vec<_> = e.tokens.iter().collect();
            ranked.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.position.cmp(&b.position)));
            println!("{} -> {} ({:?}, residual {residual:.1e})", e.doc_id, e.target_class, e.method);
            for a in ranked.iter().take(10) {
                println!("  {:>10.4}  {}", a.value, a.token);
            }
            println!("wrote {}", path.display());
        }
        ExplainTarget::Global => {
            let test = load_split(cfg, SPLIT_FILES[2])?;
            let g = global_importance(&model, token_featurizer, test.documents(), cfg.explain.per_class, &options)?;
            let k = cfg.explain.top_tokens;
            g.write_table_csv(&cfg.out_dir.join("global_importance.csv"), k)?;
            write_json(&cfg.out_dir.join("global_importance.json"), &g)?;
            for class in &g.class_order {
                let top: Vec<&str> = g.top_k(class, k).into_iter().map(|(t, _)| t).collect();
                println!("{class}: {}", top.join(", "));
            }
        }
    }
    Ok(())
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<()> {
    let corpus = synth_corpus(&cfg.synth_config())?;
    if let Some(dir) = cfg.dataset.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_dataset(&cfg.dataset, &corpus.dataset)?;
    let signatures = cfg.dataset.with_extension("signatures.json");
    write_json(&signatures, &corpus.signatures)?;
    println!(
        "wrote {} documents in {} classes to {} (signatures in {})",
        corpus.dataset.len(),
        corpus.dataset.labels().len(),
        cfg.dataset.display(),
        signatures.display()
    );
    Ok(())
}
