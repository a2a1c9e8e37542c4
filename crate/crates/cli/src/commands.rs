use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use osteotex::classify::{fit, predict_table, ClassifierKind};
use osteotex::eval::{
    run_cv, run_cv_merged, stratified_kfold, two_proportion_ztest, CvConfig, Metric,
    MetricsReport, Summary,
};
use osteotex::select::Selector;
use osteotex::FeatureTable;
use serde::Serialize;

use crate::config::{Approach, ExperimentConfig};
use crate::manifest::read_truth;
use crate::model::{project, ModelBundle};
use crate::sources::{extract as extract_sources, gather, Sources};

const INVALID: u8 = 2;

fn invalid(errors: &[String]) -> ExitCode {
    for e in errors {
        eprintln!("error: {e}");
    }
    ExitCode::from(INVALID)
}

/// Nonzero when some images could not be processed.
fn finish(sources: &Sources) -> ExitCode {
    if sources.failures > 0 {
        eprintln!("{} image(s) could not be processed", sources.failures);
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

pub fn with_config(
    (cfg, errors): (ExperimentConfig, Vec<String>),
    command: fn(&ExperimentConfig) -> Result<ExitCode>,
) -> Result<ExitCode> {
    if !errors.is_empty() {
        return Ok(invalid(&errors));
    }
    command(&cfg)
}

fn out_file(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir.join(name))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn extract(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let errors = cfg.validate_extract();
    if !errors.is_empty() {
        return Ok(invalid(&errors));
    }
    let approach = cfg.approach();
    let sources = extract_sources(cfg, approach.needs_traditional(), approach.needs_deep())?;
    for (table, name) in [(&sources.trad, "traditional.csv"), (&sources.deep, "deep.csv")] {
        if let Some(t) = table {
            let path = out_file(cfg, name)?;
            t.save(&path)?;
            eprintln!(
                "wrote {} ({} rows, {} features)",
                path.display(),
                t.n_samples(),
                t.n_features()
            );
        }
    }
    Ok(finish(&sources))
}

/// The tables an approach trains on, paired with their source names.
fn used_tables(sources: &Sources, approach: Approach) -> Result<Vec<(&'static str, &FeatureTable)>> {
    Ok(match approach {
        Approach::Traditional => vec![("traditional", sources.trad()?)],
        Approach::Deep => vec![("deep", sources.deep()?)],
        Approach::Merged => vec![("deep", sources.deep()?), ("traditional", sources.trad()?)],
    })
}

fn table_errors(tables: &[(&str, &FeatureTable)], selector: Selector, k: usize) -> Vec<String> {
    let mut errors = Vec::new();
    for (name, t) in tables {
        match t.labels() {
            None => errors.push(format!("the {name} table has no labels")),
            Some(_) if t.n_samples() == 0 => errors.push(format!("the {name} table is empty")),
            Some(_) => {}
        }
        if selector != Selector::None && k > t.n_features() {
            errors.push(format!(
                "k_features = {k} exceeds the {} features of the {name} table",
                t.n_features()
            ));
        }
    }
    errors
}

pub fn cv(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let errors = cfg.validate_cv();
    if !errors.is_empty() {
        return Ok(invalid(&errors));
    }
    let approach = cfg.approach();
    let sources = gather(cfg, approach)?;
    let tables = used_tables(&sources, approach)?;
    let config = CvConfig {
        selector: cfg.selector()?,
        k_features: cfg.k_features(),
        classifier: cfg.classifier()?,
        params: cfg.params(),
    };
    let errors = table_errors(&tables, config.selector, config.k_features);
    if !errors.is_empty() {
        return Ok(invalid(&errors));
    }
    let labels = tables[0].1.require_labels()?;
    let plan = stratified_kfold(labels, cfg.folds(), cfg.seed())?;
    let mut report = match approach {
        Approach::Merged => run_cv_merged(sources.deep()?, sources.trad()?, &config, &plan)?,
        _ => run_cv(tables[0].1, &config, &plan)?,
    };
    report.feature_type = sources.feature_type(approach);

    write(&out_file(cfg, "report.json")?, report.to_json()?)?;
    let text = report.to_text();
    write(&out_file(cfg, "report.txt")?, &text)?;
    write(&out_file(cfg, "roc.csv")?, report.roc_csv()?)?;
    print!("{text}");
    Ok(finish(&sources))
}

pub fn train(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let errors = cfg.validate_train();
    if !errors.is_empty() {
        return Ok(invalid(&errors));
    }
    let approach = cfg.approach();
    let sources = gather(cfg, approach)?;
    let tables = used_tables(&sources, approach)?;
    let (selector, k) = (cfg.selector()?, cfg.k_features());
    let errors = table_errors(&tables, selector, k);
    if !errors.is_empty() {
        return Ok(invalid(&errors));
    }

    let chosen = |t: &FeatureTable| -> Result<Vec<String>> {
        let cols = selector.select(t, k)?;
        Ok(cols.iter().map(|&c| t.names()[c].clone()).collect())
    };
    let deep_features = match &sources.deep {
        Some(t) if approach.needs_deep() => chosen(t)?,
        _ => Vec::new(),
    };
    let trad_features = match &sources.trad {
        Some(t) if approach.needs_traditional() => chosen(t)?,
        _ => Vec::new(),
    };
    let train = project(approach, &deep_features, &trad_features, &sources)?;
    let bundle = ModelBundle {
        approach,
        selector,
        k_features: k,
        seed: cfg.seed(),
        deep_features,
        trad_features,
        texture: cfg.texture(),
        network: sources.network.clone(),
        feature_type: sources.feature_type(approach),
        model: fit(cfg.classifier()?, &train, &cfg.params(), cfg.seed())?,
    };

    let path = out_file(cfg, "model.otmd")?;
    write(&path, bundle.to_bytes()?)?;
    println!(
        "trained {} on {} samples with {} features ({})",
        bundle.model.kind(),
        train.n_samples(),
        train.n_features(),
        bundle.feature_type
    );
    Ok(finish(&sources))
}

/// Blind-set scores when labels are known.
#[derive(Debug, Serialize)]
struct PredictionReport {
    feature_type: String,
    classifier: ClassifierKind,
    selector: Selector,
    n_features: usize,
    seed: u64,
    /// Predicted rows without a known label, left out of the summary.
    unlabeled: usize,
    #[serde(flatten)]
    summary: Summary,
}

fn percent(m: Metric) -> String {
    match m.value() {
        Some(v) => format!("{:.4}%", v * 100.0),
        None => m.to_string(),
    }
}

impl PredictionReport {
    fn to_text(&self) -> String {
        let s = &self.summary;
        let c = &s.confusion;
        let rows = [
            ("Feature type", self.feature_type.clone()),
            ("Classifier used", self.classifier.to_string()),
            ("Feature selector used", self.selector.name().to_string()),
            ("Number of features", self.n_features.to_string()),
            ("Accuracy", percent(s.accuracy)),
            ("AUC", format!("{:.3}", s.auc)),
            ("Sensitivity", format!("{:.4}", s.sensitivity)),
            ("Specificity", format!("{:.4}", s.specificity)),
            ("Confusion", format!("TP-{}, FP-{}, TN-{}, FN-{}", c.tp, c.fp, c.tn, c.fn_)),
            ("Samples", s.n_samples.to_string()),
            ("Unlabeled", self.unlabeled.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<24}{v}");
        }
        out
    }
}

pub fn predict(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let errors = cfg.validate_predict();
    if !errors.is_empty() {
        return Ok(invalid(&errors));
    }
    let model_path = cfg.model.as_deref().context("no model given")?;
    let bytes =
        fs::read(model_path).with_context(|| format!("cannot read {}", model_path.display()))?;
    let bundle = ModelBundle::from_bytes(&bytes)
        .with_context(|| format!("loading model {}", model_path.display()))?;

    // extraction must match training
    let mut cfg = cfg.clone();
    cfg.approach = Some(bundle.approach);
    cfg.glcm_levels = Some(bundle.texture.glcm_levels);
    cfg.glrlm_levels = Some(bundle.texture.glrlm_levels);
    let errors = cfg.validate_sources_for(bundle.approach);
    if !errors.is_empty() {
        return Ok(invalid(&errors));
    }
    let sources = gather(&cfg, bundle.approach)?;
    if let (Some(trained), Some(now)) = (&bundle.network, &sources.network) {
        if trained != now {
            eprintln!("warning: model was trained on {trained} features, input uses {now}");
        }
    }
    let table = bundle.project(&sources)?;
    let preds = predict_table(&bundle.model, &table)?;

    let mut csv = String::from("id,label,score\n");
    for (id, p) in table.ids().iter().zip(&preds) {
        let _ = writeln!(csv, "{id},{},{}", p.label, p.score);
    }
    write(&out_file(&cfg, "predictions.csv")?, csv)?;

    let truth: Option<HashMap<String, u8>> = match (&cfg.truth, table.labels()) {
        (Some(path), _) => Some(read_truth(path)?),
        (None, Some(labels)) => Some(table.ids().iter().cloned().zip(labels.iter().copied()).collect()),
        (None, None) => None,
    };
    if let Some(truth) = truth {
        let (mut scores, mut predicted, mut labels) = (Vec::new(), Vec::new(), Vec::new());
        for (id, p) in table.ids().iter().zip(&preds) {
            if let Some(&l) = truth.get(id) {
                scores.push(p.score);
                predicted.push(p.label);
                labels.push(l);
            }
        }
        let unlabeled = preds.len() - labels.len();
        if unlabeled > 0 {
            eprintln!("warning: {unlabeled} predicted sample(s) have no known label");
        }
        if labels.is_empty() {
            bail!("none of the predicted samples has a known label");
        }
        let report = PredictionReport {
            feature_type: bundle.feature_type.clone(),
            classifier: bundle.model.kind(),
            selector: bundle.selector,
            n_features: table.n_features(),
            seed: bundle.seed,
            unlabeled,
            summary: Summary::from_scores(&scores, &predicted, &labels)?,
        };
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        write(&out_file(&cfg, "prediction_report.json")?, json)?;
        let text = report.to_text();
        write(&out_file(&cfg, "prediction_report.txt")?, &text)?;
        print!("{text}");
    } else {
        println!("predicted {} samples", preds.len());
    }
    Ok(finish(&sources))
}

pub fn ztest(acc1: f64, n1: usize, acc2: f64, n2: usize) -> Result<ExitCode> {
    match two_proportion_ztest(acc1, n1, acc2, n2) {
        Ok(t) => {
            println!("z = {:.4}", t.z);
            println!("p = {:.6}", t.p_two_tailed);
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => Ok(invalid(&[e.to_string()])),
    }
}

pub fn report(files: &[PathBuf]) -> Result<ExitCode> {
    let reports = files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str::<MetricsReport>(&text)
                .with_context(|| format!("{} is not a cross-validation report", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    if let [one] = reports.as_slice() {
        print!("{}", one.to_text());
        return Ok(ExitCode::SUCCESS);
    }
    let columns: Vec<Vec<(&str, String)>> = reports.iter().map(|r| r.summary_rows()).collect();
    let widths: Vec<usize> = columns
        .iter()
        .map(|c| c.iter().map(|(_, v)| v.len()).max().unwrap_or(0) + 2)
        .collect();
    let mut out = String::new();
    for (i, (label, _)) in columns[0].iter().enumerate() {
        let _ = write!(out, "{label:<24}");
        for (col, w) in columns.iter().zip(&widths) {
            let _ = write!(out, "{:<w$}", col[i].1);
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}
