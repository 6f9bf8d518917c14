//! Command-line driver: split, train, evaluate, explain and synth commands
//! over one run configuration.

pub mod commands;
pub mod config;
pub mod featurizer;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fundcat::{ClassifyError, ExplainError};
use serde::Serialize;

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "fundcat", version, about = "Fund description classification pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides one config value, e.g. `--set train.max_iterations=200`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean the dataset and write stratified train/validation/test splits.
    Split,
    /// Fit the featurizer and grid-search the classifier.
    Train,
    /// Score a trained model on the test split.
    Evaluate {
        /// Model file; defaults to `<out>/model.json`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Restrict the confusion CSVs to the N classes with most support.
        #[arg(long, value_name = "N")]
        top_classes: Option<usize>,
    },
    /// Attribute predictions to tokens.
    Explain {
        /// Model file; defaults to `<out>/model.json`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Explain one document, looked up in the test, validation and train splits.
        #[arg(long, conflicts_with = "global", required_unless_present = "global")]
        doc: Option<String>,
        /// Target class for `--doc`; defaults to the predicted class.
        #[arg(long, requires = "doc")]
        class: Option<String>,
        /// Sum attributions over the test split per class.
        #[arg(long)]
        global: bool,
    },
    /// Generate a synthetic corpus with planted class vocabularies.
    Synth,
}

impl Cli {
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut overrides = self.global.overrides.clone();
        if let Some(seed) = self.global.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(out) = &self.global.out {
            overrides.push(format!("out_dir={}", toml_string(&out.to_string_lossy())));
        }
        RunConfig::load(self.global.config.as_deref(), &overrides)
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.run_config()?;
    match &cli.command {
        Command::Split => commands::cmd_split(&cfg),
        Command::Train => commands::cmd_train(&cfg),
        Command::Evaluate { model, top_classes } => {
            commands::cmd_evaluate(&cfg, model.as_deref(), *top_classes)
        }
        Command::Explain {
            model,
            doc,
            class,
            global,
        } => {
            let target = if *global {
                commands::ExplainTarget::Global
            } else {
                commands::ExplainTarget::Document {
                    id: doc.clone().expect("clap requires --doc or --global"),
                    class: class.clone(),
                }
            };
            commands::cmd_explain(&cfg, model.as_deref(), &target)
        }
        Command::Synth => commands::cmd_synth(&cfg),
    }
}

/// 2 for numeric failures inside the pipeline, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let numeric = err.chain().any(|e| {
        matches!(e.downcast_ref::<ClassifyError>(), Some(ClassifyError::NonFinite { .. }))
            || matches!(e.downcast_ref::<ExplainError>(), Some(ExplainError::NonFinite { .. }))
            || e.downcast_ref::<fundcat::Error>().is_some_and(fundcat::Error::is_numeric)
    });
    if numeric {
        2
    } else {
        1
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
