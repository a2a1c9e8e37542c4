use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::metrics::{auc, confusion, metrics, roc_points, ConfusionCounts, Metric};
use crate::classify::{fit, predict, ClassifierKind, ClassifierParams};
use crate::error::{Error, Result};
use crate::select::{merge_feature_sets, Selector};
use crate::table::FeatureTable;

/// Everything that decides a cross-validation run apart from the data and
/// the fold plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub selector: Selector,
    /// Features kept per source; ignored by [`Selector::None`].
    pub k_features: usize,
    pub classifier: ClassifierKind,
    #[serde(default)]
    pub params: ClassifierParams,
}

/// Pooled confusion-derived metrics plus AUC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_samples: usize,
    pub confusion: ConfusionCounts,
    pub accuracy: Metric,
    pub sensitivity: Metric,
    pub specificity: Metric,
    pub auc: Metric,
}

impl Summary {
    /// AUC is undefined when only one class is present.
    pub fn from_scores(scores: &[f64], preds: &[u8], labels: &[u8]) -> Result<Summary> {
        let c = confusion(preds, labels)?;
        let rates = metrics(&c);
        let both = labels.contains(&0) && labels.contains(&1);
        let auc = if both {
            Metric::Defined(auc(scores, labels)?)
        } else {
            Metric::Undefined
        };
        Ok(Summary {
            n_samples: labels.len(),
            confusion: c,
            accuracy: rates.accuracy,
            sensitivity: rates.sensitivity,
            specificity: rates.specificity,
            auc,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionCounts,
    pub accuracy: Metric,
    /// Selected feature names in rank order.
    pub selected: Vec<String>,
}

/// One out-of-fold prediction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutOfFold {
    pub id: String,
    pub fold: usize,
    pub label: u8,
    pub predicted: u8,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Free-form description of the feature source, e.g. `deep (vgg-m)`.
    pub feature_type: String,
    pub config: CvConfig,
    /// Feature count per source after selection.
    pub features_per_source: Vec<(String, usize)>,
    pub folds: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub summary: Summary,
    pub per_fold: Vec<FoldResult>,
    pub predictions: Vec<OutOfFold>,
}

/// Stratified cross-validation on one feature table.
///
/// Per fold the selector and classifier see training rows only; test-row
/// scores from all folds are pooled for the confusion counts and AUC.
pub fn run_cv(table: &FeatureTable, config: &CvConfig, folds: &FoldPlan) -> Result<MetricsReport> {
    run_sources(&[("", table)], config, folds, "single source")
}

/// Like [`run_cv`] over two tables of the same samples. Each fold selects
/// the top `k_features` of each source independently, then trains on the
/// merged columns (`deep:` and `trad:` prefixes).
pub fn run_cv_merged(
    deep: &FeatureTable,
    trad: &FeatureTable,
    config: &CvConfig,
    folds: &FoldPlan,
) -> Result<MetricsReport> {
    if deep.ids() != trad.ids() {
        return Err(Error::Table(
            "deep and traditional tables list different samples".into(),
        ));
    }
    if deep.labels() != trad.labels() {
        return Err(Error::Table(
            "deep and traditional tables disagree on labels".into(),
        ));
    }
    run_sources(&[("deep", deep), ("trad", trad)], config, folds, "merged")
}

struct FoldOutput {
    result: FoldResult,
    rows: Vec<(usize, u8, f64)>,
}

fn check_k(config: &CvConfig, table: &FeatureTable, source: &str) -> Result<usize> {
    let d = table.n_features();
    if config.selector == Selector::None {
        return Ok(d);
    }
    let k = config.k_features;
    if k == 0 || k > d {
        let src = if source.is_empty() { "table" } else { source };
        return Err(Error::InvalidArgument(format!(
            "k_features = {k} but the {src} has {d} features"
        )));
    }
    Ok(k)
}

fn run_sources(
    sources: &[(&str, &FeatureTable)],
    config: &CvConfig,
    folds: &FoldPlan,
    feature_type: &str,
) -> Result<MetricsReport> {
    let first = sources[0].1;
    let labels = first.require_labels()?;
    if folds.n_samples() != first.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "fold plan covers {} samples, table has {}",
            folds.n_samples(),
            first.n_samples()
        )));
    }
    let mut features_per_source = Vec::with_capacity(sources.len());
    for &(name, t) in sources {
        features_per_source.push((name.to_string(), check_k(config, t, name)?));
    }

    let outputs: Vec<FoldOutput> = (0..folds.k())
        .into_par_iter()
        .map(|f| run_fold(sources, config, folds, f))
        .collect::<Result<_>>()?;

    let mut pooled: Vec<(usize, usize, u8, f64)> = outputs
        .iter()
        .enumerate()
        .flat_map(|(f, o)| o.rows.iter().map(move |&(i, p, s)| (f, i, p, s)))
        .collect();
    pooled.sort_by_key(|&(f, i, _, _)| (f, i));

    let scores: Vec<f64> = pooled.iter().map(|r| r.3).collect();
    let preds: Vec<u8> = pooled.iter().map(|r| r.2).collect();
    let truth: Vec<u8> = pooled.iter().map(|r| labels[r.1]).collect();
    let summary = Summary::from_scores(&scores, &preds, &truth)?;
    let predictions = pooled
        .iter()
        .map(|&(fold, i, predicted, score)| OutOfFold {
            id: first.ids()[i].clone(),
            fold,
            label: labels[i],
            predicted,
            score,
        })
        .collect();

    Ok(MetricsReport {
        feature_type: feature_type.to_string(),
        config: config.clone(),
        features_per_source,
        folds: folds.k(),
        seed: folds.seed(),
        summary,
        per_fold: outputs.into_iter().map(|o| o.result).collect(),
        predictions,
    })
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_fold(
    sources: &[(&str, &FeatureTable)],
    config: &CvConfig,
    folds: &FoldPlan,
    f: usize,
) -> Result<FoldOutput> {
    let train_rows = folds.train_rows(f);
    let test_rows = folds.test_rows(f);

    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(sources.len());
    for &(_, t) in sources {
        let train = t.subset_rows(&train_rows);
        chosen.push(config.selector.select(&train, config.k_features)?);
    }
    let projected = match sources {
        [(_, t)] => t.select_columns(&chosen[0])?,
        [(_, deep), (_, trad)] => merge_feature_sets(deep, &chosen[0], trad, &chosen[1])?,
        _ => unreachable!("one or two sources"),
    };

    let train = projected.subset_rows(&train_rows);
    let model = fit(
        config.classifier,
        &train,
        &config.params,
        fold_seed(folds.seed(), f),
    )?;
    let labels = projected.require_labels()?;
    let mut rows = Vec::with_capacity(test_rows.len());
    for &i in &test_rows {
        let p = predict(&model, projected.row(i))?;
        rows.push((i, p.label, p.score));
    }
    let preds: Vec<u8> = rows.iter().map(|r| r.1).collect();
    let truth: Vec<u8> = test_rows.iter().map(|&i| labels[i]).collect();
    let c = confusion(&preds, &truth)?;
    Ok(FoldOutput {
        result: FoldResult {
            fold: f,
            n_train: train_rows.len(),
            n_test: test_rows.len(),
            confusion: c,
            accuracy: metrics(&c).accuracy,
            selected: projected.names().to_vec(),
        },
        rows,
    })
}

fn percent(m: Metric) -> String {
    match m {
        Metric::Defined(v) => format!("{:.4}%", v * 100.0),
        Metric::Undefined => "undefined".into(),
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Row label and value of every summary line, in display order.
    pub fn summary_rows(&self) -> Vec<(&'static str, String)> {
        let s = &self.summary;
        let c = &s.confusion;
        let n_features = match self.features_per_source.as_slice() {
            [(_, k)] if self.config.selector == Selector::None => format!("ALL ({k})"),
            [(_, k)] => k.to_string(),
            many => {
                let total: usize = many.iter().map(|p| p.1).sum();
                let parts: Vec<String> = many.iter().map(|(n, k)| format!("{k} {n}")).collect();
                format!("{total} ({})", parts.join(" + "))
            }
        };
        vec![
            ("Feature type", self.feature_type.clone()),
            ("Classifier used", self.config.classifier.to_string()),
            ("Feature selector used", self.config.selector.name().to_string()),
            ("Number of features", n_features),
            ("Accuracy", percent(s.accuracy)),
            ("AUC", format!("{:.3}", s.auc)),
            ("Sensitivity", format!("{:.4}", s.sensitivity)),
            ("Specificity", format!("{:.4}", s.specificity)),
            (
                "Confusion",
                format!("TP-{}, FP-{}, TN-{}, FN-{}", c.tp, c.fp, c.tn, c.fn_),
            ),
            ("Samples", s.n_samples.to_string()),
            ("Folds", format!("{} (seed {})", self.folds, self.seed)),
        ]
    }

    /// Two-column layout: one row label per line, then a per-fold table.
    pub fn to_text(&self) -> String {
        let rows = self.summary_rows();
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<24}{v}");
        }
        out.push('\n');
        let _ = writeln!(out, "fold  train  test  TP  FP  TN  FN  accuracy");
        for f in &self.per_fold {
            let c = &f.confusion;
            let _ = writeln!(
                out,
                "{:>4}  {:>5}  {:>4}  {:>2}  {:>2}  {:>2}  {:>2}  {}",
                f.fold,
                f.n_train,
                f.n_test,
                c.tp,
                c.fp,
                c.tn,
                c.fn_,
                percent(f.accuracy)
            );
        }
        out
    }

    /// Pooled ROC as `fpr,tpr` CSV.
    pub fn roc_csv(&self) -> Result<String> {
        let scores: Vec<f64> = self.predictions.iter().map(|p| p.score).collect();
        let labels: Vec<u8> = self.predictions.iter().map(|p| p.label).collect();
        let mut out = String::from("fpr,tpr\n");
        for (x, y) in roc_points(&scores, &labels)? {
            let _ = writeln!(out, "{x},{y}");
        }
        Ok(out)
    }
}
