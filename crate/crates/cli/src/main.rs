//! `osteotex`: feature extraction, cross-validation, blind prediction and
//! reporting for bone radiograph texture classification.

mod commands;
mod config;
mod manifest;
mod model;
mod sources;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Approach, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "osteotex", version, about = "Texture and deep-feature classification of bone radiographs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract traditional and/or deep features to CSV tables.
    Extract(Flags),
    /// Stratified k-fold cross-validation with per-fold feature selection.
    Cv(Flags),
    /// Select features and fit a classifier on all labeled rows.
    Train(Flags),
    /// Apply a trained model; scores against labels when they are known.
    Predict(Flags),
    /// Pooled two-proportion z-test between two accuracies.
    Ztest(ZtestArgs),
    /// Print one or more saved cross-validation reports.
    Report(ReportArgs),
}

/// Flags shared by the pipeline commands. Each overrides the matching
/// field of `--config`.
#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    approach: Option<Approach>,
    /// Directory the manifest filenames are relative to.
    #[arg(long)]
    images: Option<PathBuf>,
    /// CSV with `id,filename,label` columns.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Shipped network (`vgg-f`, `vgg-m`, `vgg-s`) or a spec file.
    #[arg(long)]
    net_spec: Option<String>,
    /// OTWT weight file.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Precomputed traditional feature table, instead of extracting.
    #[arg(long = "trad-table")]
    traditional_table: Option<PathBuf>,
    /// Precomputed deep feature table, instead of extracting.
    #[arg(long)]
    deep_table: Option<PathBuf>,
    #[arg(long, value_parser = ["su", "relieff", "ttest", "none"])]
    selector: Option<String>,
    #[arg(long)]
    su_bins: Option<usize>,
    #[arg(long)]
    relieff_neighbors: Option<usize>,
    /// Features kept per source.
    #[arg(long)]
    k_features: Option<usize>,
    #[arg(long, value_parser = ["nb", "svm", "dtree", "rf", "nn1"])]
    classifier: Option<String>,
    /// Classifier parameters as JSON, e.g. '{"trees": 200}'.
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    /// Default 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    glcm_levels: Option<usize>,
    #[arg(long)]
    glrlm_levels: Option<usize>,
    /// Model file written by `train`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// CSV of withheld `id,label` pairs for scoring predictions.
    #[arg(long)]
    truth: Option<PathBuf>,
}

impl Flags {
    /// Merged config plus every problem met while building it.
    fn resolve(self) -> (ExperimentConfig, Vec<String>) {
        let mut errors = Vec::new();
        let base = match &self.config {
            Some(p) => ExperimentConfig::load(p).unwrap_or_else(|e| {
                errors.push(format!("{e:#}"));
                ExperimentConfig::default()
            }),
            None => ExperimentConfig::default(),
        };
        let params = self.params.as_deref().and_then(|s| {
            serde_json::from_str(s)
                .map_err(|e| errors.push(format!("--params: {e}")))
                .ok()
        });
        let flags = ExperimentConfig {
            approach: self.approach,
            images: self.images,
            manifest: self.manifest,
            net_spec: self.net_spec,
            weights: self.weights,
            traditional_table: self.traditional_table,
            deep_table: self.deep_table,
            selector: self.selector,
            su_bins: self.su_bins,
            relieff_neighbors: self.relieff_neighbors,
            k_features: self.k_features,
            classifier: self.classifier,
            params,
            folds: self.folds,
            seed: self.seed,
            out: self.out,
            glcm_levels: self.glcm_levels,
            glrlm_levels: self.glrlm_levels,
            model: self.model,
            truth: self.truth,
        };
        (base.overlay(flags), errors)
    }
}

#[derive(Args, Debug)]
struct ZtestArgs {
    /// First accuracy, as a fraction.
    #[arg(long, allow_hyphen_values = true)]
    acc1: f64,
    #[arg(long)]
    n1: usize,
    #[arg(long, allow_hyphen_values = true)]
    acc2: f64,
    #[arg(long)]
    n2: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// report.json files; several are shown side by side.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(f) => commands::with_config(f.resolve(), commands::extract),
        Command::Cv(f) => commands::with_config(f.resolve(), commands::cv),
        Command::Train(f) => commands::with_config(f.resolve(), commands::train),
        Command::Predict(f) => commands::with_config(f.resolve(), commands::predict),
        Command::Ztest(a) => commands::ztest(a.acc1, a.n1, a.acc2, a.n2),
        Command::Report(a) => commands::report(&a.files),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
