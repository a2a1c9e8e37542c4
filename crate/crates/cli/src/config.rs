//! Experiment configuration: a JSON file whose fields mirror the command
//! line flags. Flags override file values; relative paths in a file are
//! resolved against the file's directory.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use osteotex::classify::{ClassifierKind, ClassifierParams};
use osteotex::cnn::{load_network_spec, parse_network_spec, shipped};
use osteotex::select::Selector;
use osteotex::texture::{traditional_feature_names, TraditionalConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    #[default]
    Traditional,
    Deep,
    Merged,
}

impl Approach {
    pub fn needs_deep(self) -> bool {
        matches!(self, Approach::Deep | Approach::Merged)
    }

    pub fn needs_traditional(self) -> bool {
        matches!(self, Approach::Traditional | Approach::Merged)
    }

    pub fn name(self) -> &'static str {
        match self {
            Approach::Traditional => "traditional",
            Approach::Deep => "deep",
            Approach::Merged => "merged",
        }
    }
}

/// Everything optional, as read from a file or the command line.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub approach: Option<Approach>,
    pub images: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub net_spec: Option<String>,
    pub weights: Option<PathBuf>,
    pub traditional_table: Option<PathBuf>,
    pub deep_table: Option<PathBuf>,
    pub selector: Option<String>,
    pub su_bins: Option<usize>,
    pub relieff_neighbors: Option<usize>,
    pub k_features: Option<usize>,
    pub classifier: Option<String>,
    pub params: Option<ClassifierParams>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub glcm_levels: Option<usize>,
    pub glrlm_levels: Option<usize>,
    pub model: Option<PathBuf>,
    pub truth: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.images,
            &mut cfg.manifest,
            &mut cfg.weights,
            &mut cfg.traditional_table,
            &mut cfg.deep_table,
            &mut cfg.out,
            &mut cfg.model,
            &mut cfg.truth,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(spec) = &cfg.net_spec {
            if shipped::by_name(spec).is_none() && Path::new(spec).is_relative() {
                cfg.net_spec = Some(base.join(spec).to_string_lossy().into_owned());
            }
        }
        Ok(cfg)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: ExperimentConfig) -> Self {
        overlay!(self, other; approach, images, manifest, net_spec, weights,
            traditional_table, deep_table, selector, su_bins, relieff_neighbors,
            k_features, classifier, params, folds, seed, out, glcm_levels,
            glrlm_levels, model, truth);
        self
    }

    pub fn approach(&self) -> Approach {
        self.approach.unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    pub fn folds(&self) -> usize {
        self.folds.unwrap_or(10)
    }

    pub fn k_features(&self) -> usize {
        self.k_features.unwrap_or(10)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn texture(&self) -> TraditionalConfig {
        let d = TraditionalConfig::default();
        TraditionalConfig {
            glcm_levels: self.glcm_levels.unwrap_or(d.glcm_levels),
            glrlm_levels: self.glrlm_levels.unwrap_or(d.glrlm_levels),
        }
    }

    pub fn params(&self) -> ClassifierParams {
        self.params.clone().unwrap_or_default()
    }

    pub fn selector(&self) -> Result<Selector> {
        let sel = Selector::from_name(self.selector.as_deref().unwrap_or("su"))?;
        Ok(match sel {
            Selector::Su { bins } => Selector::Su {
                bins: self.su_bins.unwrap_or(bins),
            },
            Selector::ReliefF { neighbors } => Selector::ReliefF {
                neighbors: self.relieff_neighbors.unwrap_or(neighbors),
            },
            other => other,
        })
    }

    pub fn classifier(&self) -> Result<ClassifierKind> {
        Ok(ClassifierKind::from_name(
            self.classifier.as_deref().unwrap_or("rf"),
        )?)
    }

    fn check_path(errors: &mut Vec<String>, what: &str, p: &Option<PathBuf>) {
        if let Some(p) = p {
            if !p.exists() {
                errors.push(format!("{what} {} does not exist", p.display()));
            }
        }
    }

    fn source_errors(&self, errors: &mut Vec<String>, approach: Approach) {
        let images = self.images.is_some() && self.manifest.is_some();
        if approach.needs_traditional() && self.traditional_table.is_none() && !images {
            errors.push(format!(
                "{} approach needs --trad-table or both --images and --manifest",
                approach.name()
            ));
        }
        if approach.needs_deep() && self.deep_table.is_none() {
            if !images {
                errors.push(format!(
                    "{} approach needs --deep-table or both --images and --manifest",
                    approach.name()
                ));
            }
            self.network_errors(errors);
        }
    }

    fn network_errors(&self, errors: &mut Vec<String>) {
        match &self.net_spec {
            None => errors.push("deep features need --net-spec".into()),
            Some(s) if shipped::by_name(s).is_none() && !Path::new(s).exists() => errors.push(
                format!("network spec {s} is neither a shipped name (vgg-f, vgg-m, vgg-s) nor an existing file"),
            ),
            Some(_) => {}
        }
        if self.weights.is_none() {
            errors.push("deep features need --weights".into());
        }
    }

    fn common_errors(&self, errors: &mut Vec<String>) {
        Self::check_path(errors, "image directory", &self.images);
        Self::check_path(errors, "manifest", &self.manifest);
        Self::check_path(errors, "weights", &self.weights);
        Self::check_path(errors, "traditional table", &self.traditional_table);
        Self::check_path(errors, "deep table", &self.deep_table);
        Self::check_path(errors, "model", &self.model);
        Self::check_path(errors, "truth labels", &self.truth);
        for (what, v) in [("glcm_levels", self.glcm_levels), ("glrlm_levels", self.glrlm_levels)] {
            if let Some(l) = v {
                if !(2..=256).contains(&l) {
                    errors.push(format!("{what} must be in 2..=256, got {l}"));
                }
            }
        }
    }

    /// Feature count of a source, when it can be told without extracting.
    fn source_width(&self, deep: bool) -> Option<usize> {
        let table = if deep { &self.deep_table } else { &self.traditional_table };
        if let Some(p) = table {
            let mut rdr = csv::Reader::from_path(p).ok()?;
            return Some(rdr.headers().ok()?.len().saturating_sub(2));
        }
        if !deep {
            return Some(traditional_feature_names().len());
        }
        let spec = self.net_spec.as_deref()?;
        let spec = match shipped::by_name(spec) {
            Some(text) => parse_network_spec(text),
            None => load_network_spec(spec),
        };
        spec.ok().map(|s| s.feature_len())
    }

    fn width_errors(&self, errors: &mut Vec<String>) {
        let (Ok(selector), Some(k)) = (self.selector(), self.k_features) else {
            return;
        };
        if selector == Selector::None {
            return;
        }
        let approach = self.approach();
        for (deep, needed, name) in [
            (true, approach.needs_deep(), "deep"),
            (false, approach.needs_traditional(), "traditional"),
        ] {
            match self.source_width(deep) {
                Some(d) if needed && k > d => errors.push(format!(
                    "k_features = {k} exceeds the {d} features of the {name} table"
                )),
                _ => {}
            }
        }
    }

    fn learning_errors(&self, errors: &mut Vec<String>) {
        self.width_errors(errors);
        if let Err(e) = self.selector() {
            errors.push(e.to_string());
        }
        if let Err(e) = self.classifier() {
            errors.push(e.to_string());
        }
        if self.k_features == Some(0) {
            errors.push("k_features must be at least 1".into());
        }
        if self.su_bins.is_some_and(|b| b < 2) {
            errors.push("su_bins must be at least 2".into());
        }
        if self.relieff_neighbors == Some(0) {
            errors.push("relieff_neighbors must be at least 1".into());
        }
        let p = self.params();
        if !(p.svm_gamma > 0.0 && p.svm_gamma.is_finite()) {
            errors.push(format!("params.svm_gamma must be positive, got {}", p.svm_gamma));
        }
        if p.trees == 0 {
            errors.push("params.trees must be at least 1".into());
        }
        if p.max_features == Some(0) {
            errors.push("params.max_features must be at least 1".into());
        }
    }

    /// All problems found, for the extract command.
    pub fn validate_extract(&self) -> Vec<String> {
        let mut errors = Vec::new();
        self.common_errors(&mut errors);
        if self.images.is_none() {
            errors.push("extract needs --images".into());
        }
        if self.manifest.is_none() {
            errors.push("extract needs --manifest".into());
        }
        if self.approach().needs_deep() {
            self.network_errors(&mut errors);
        }
        errors
    }

    pub fn validate_cv(&self) -> Vec<String> {
        let mut errors = Vec::new();
        self.common_errors(&mut errors);
        self.source_errors(&mut errors, self.approach());
        self.learning_errors(&mut errors);
        if self.folds() < 2 {
            errors.push(format!("folds must be at least 2, got {}", self.folds()));
        }
        errors
    }

    pub fn validate_train(&self) -> Vec<String> {
        let mut errors = Vec::new();
        self.common_errors(&mut errors);
        self.source_errors(&mut errors, self.approach());
        self.learning_errors(&mut errors);
        errors
    }

    /// The approach comes from the model, so sources are checked later.
    pub fn validate_predict(&self) -> Vec<String> {
        let mut errors = Vec::new();
        self.common_errors(&mut errors);
        if self.model.is_none() {
            errors.push("predict needs --model".into());
        }
        errors
    }

    pub fn validate_sources_for(&self, approach: Approach) -> Vec<String> {
        let mut errors = Vec::new();
        self.source_errors(&mut errors, approach);
        errors
    }
}
