//! Filter feature rankers (symmetric uncertainty, Relief-F, Welch t-test),
//! top-k selection and merging of selections from two feature sources.

mod relieff;
mod su;
mod ttest;

pub use relieff::{relieff, relieff_weights};
pub use su::{discretize_equal_frequency, entropy, rank_su, symmetric_uncertainty};
pub use ttest::{ttest_scores, welch_t};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::FeatureTable;

/// `(feature index, score)` pairs, best first. Ties are broken by
/// ascending feature index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeatures {
    entries: Vec<(usize, f64)>,
}

impl RankedFeatures {
    /// Sorts `scores` (indexed by feature) into a ranking. NaN scores are
    /// rejected; `+inf` is allowed as a "perfect separation" sentinel.
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidArgument("NaN feature score".into()));
        }
        let mut entries: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(RankedFeatures { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// Score of feature `index`, if ranked.
    pub fn score_of(&self, index: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == index).map(|e| e.1)
    }

    /// `rank,feature,score` CSV, ranks starting at 1.
    pub fn to_csv(&self, names: &[String]) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["rank", "feature", "score"])?;
        for (r, (idx, score)) in self.entries.iter().enumerate() {
            let name = names.get(*idx).ok_or_else(|| {
                Error::InvalidArgument(format!("feature index {idx} has no name"))
            })?;
            wtr.write_record([(r + 1).to_string(), name.clone(), score.to_string()])?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

pub fn select_top_k(r: &RankedFeatures, k: usize) -> Result<Vec<usize>> {
    if k > r.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {k} of {} features",
            r.len()
        )));
    }
    Ok(r.entries[..k].iter().map(|e| e.0).collect())
}

/// Which ranker to run, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Selector {
    /// Symmetric uncertainty on equal-frequency discretized features.
    Su { bins: usize },
    ReliefF { neighbors: usize },
    Ttest,
    /// Keep every feature in table order.
    None,
}

impl Selector {
    pub const DEFAULT_SU_BINS: usize = 10;
    pub const DEFAULT_RELIEFF_NEIGHBORS: usize = 10;

    pub fn su() -> Self {
        Selector::Su {
            bins: Self::DEFAULT_SU_BINS,
        }
    }

    pub fn relieff() -> Self {
        Selector::ReliefF {
            neighbors: Self::DEFAULT_RELIEFF_NEIGHBORS,
        }
    }

    /// Parses the command-line spelling: `su`, `relieff`, `ttest`, `none`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "su" => Ok(Self::su()),
            "relieff" => Ok(Self::relieff()),
            "ttest" => Ok(Selector::Ttest),
            "none" => Ok(Selector::None),
            other => Err(Error::InvalidArgument(format!("unknown selector {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Selector::Su { .. } => "su",
            Selector::ReliefF { .. } => "relieff",
            Selector::Ttest => "ttest",
            Selector::None => "none",
        }
    }

    pub fn rank(&self, table: &FeatureTable) -> Result<RankedFeatures> {
        match *self {
            Selector::Su { bins } => rank_su(table, bins),
            Selector::ReliefF { neighbors } => relieff(table, neighbors),
            Selector::Ttest => ttest_scores(table),
            Selector::None => RankedFeatures::from_scores(vec![0.0; table.n_features()]),
        }
    }

    /// Column indices to keep: the top `k`, or all columns for
    /// [`Selector::None`] (where `k` is ignored).
    pub fn select(&self, table: &FeatureTable, k: usize) -> Result<Vec<usize>> {
        match self {
            Selector::None => Ok((0..table.n_features()).collect()),
            _ => select_top_k(&self.rank(table)?, k),
        }
    }
}

/// Column-concatenates the chosen columns of two tables over the same
/// samples, prefixing names with `deep:` and `trad:`.
pub fn merge_feature_sets(
    deep: &FeatureTable,
    deep_cols: &[usize],
    trad: &FeatureTable,
    trad_cols: &[usize],
) -> Result<FeatureTable> {
    if deep.n_samples() != trad.n_samples() {
        return Err(Error::Table(format!(
            "row count mismatch: {} deep vs {} traditional",
            deep.n_samples(),
            trad.n_samples()
        )));
    }
    let a = deep.select_columns(deep_cols)?.with_prefix("deep:");
    let b = trad.select_columns(trad_cols)?.with_prefix("trad:");
    a.hconcat(&b)
}
