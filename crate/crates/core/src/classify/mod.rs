//! Naive Bayes, linear LS-SVM, decision tree, random forest and 1-nearest
//! neighbor behind one fit/predict interface.
//!
//! Every model returns a positive-class score in `[0, 1]`; the hard label is
//! 1 exactly when the score is at least 0.5.

mod forest;
mod lssvm;
mod nb;
mod nn;
pub mod otmd;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::FeatureTable;

pub use forest::RandomForest;
pub use lssvm::LsSvm;
pub use nb::GaussianNb;
pub use nn::NearestNeighbor;
pub use tree::{DecisionTree, TreeParams};

pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Nb,
    Lssvm,
    Dtree,
    Rforest,
    Nn1,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Nb,
        ClassifierKind::Lssvm,
        ClassifierKind::Dtree,
        ClassifierKind::Rforest,
        ClassifierKind::Nn1,
    ];

    /// Accepts both the command-line spelling (`nb`, `svm`, `dtree`, `rf`,
    /// `nn1`) and the model names (`lssvm`, `rforest`).
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "nb" => Ok(ClassifierKind::Nb),
            "svm" | "lssvm" => Ok(ClassifierKind::Lssvm),
            "dtree" => Ok(ClassifierKind::Dtree),
            "rf" | "rforest" => Ok(ClassifierKind::Rforest),
            "nn1" => Ok(ClassifierKind::Nn1),
            other => Err(Error::InvalidArgument(format!("unknown classifier {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Nb => "nb",
            ClassifierKind::Lssvm => "lssvm",
            ClassifierKind::Dtree => "dtree",
            ClassifierKind::Rforest => "rforest",
            ClassifierKind::Nn1 => "nn1",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    /// LS-SVM regularization; larger means a closer fit.
    pub svm_gamma: f64,
    pub trees: usize,
    pub bootstrap: bool,
    /// Candidate features per split in the forest; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            svm_gamma: 1.0,
            trees: 100,
            bootstrap: true,
            max_features: None,
            max_depth: 25,
            min_samples_split: 2,
        }
    }
}

impl ClassifierParams {
    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: u8,
    pub score: f64,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        let score = score.clamp(0.0, 1.0);
        Prediction {
            label: u8::from(score >= DECISION_THRESHOLD),
            score,
        }
    }
}

/// Per-feature z-scoring fit on training data. Zero-spread features keep a
/// unit scale so they map to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(table: &FeatureTable) -> Self {
        let n = table.n_samples() as f64;
        let d = table.n_features();
        let mut mean = vec![0f64; d];
        for row in table.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut sd = vec![0f64; d];
        for row in table.rows() {
            for ((s, m), v) in sd.iter_mut().zip(&mean).zip(row) {
                *s += (v - m).powi(2);
            }
        }
        for s in sd.iter_mut() {
            *s = (*s / n).sqrt();
            if !(*s > 0.0) {
                *s = 1.0;
            }
        }
        Standardizer { mean, sd }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelBody {
    Nb(GaussianNb),
    Lssvm(LsSvm),
    Dtree(DecisionTree),
    Rforest(RandomForest),
    Nn1(NearestNeighbor),
}

/// A fitted classifier; immutable and shareable across threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    n_features: usize,
    standardizer: Option<Standardizer>,
    body: ModelBody,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.body {
            ModelBody::Nb(_) => ClassifierKind::Nb,
            ModelBody::Lssvm(_) => ClassifierKind::Lssvm,
            ModelBody::Dtree(_) => ClassifierKind::Dtree,
            ModelBody::Rforest(_) => ClassifierKind::Rforest,
            ModelBody::Nn1(_) => ClassifierKind::Nn1,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict(&self, sample: &[f64]) -> Result<Prediction> {
        predict(self, sample)
    }

    pub fn to_otmd_bytes(&self) -> Result<Vec<u8>> {
        otmd::encode(self)
    }

    pub fn from_otmd_bytes(bytes: &[u8]) -> Result<Self> {
        otmd::decode(bytes)
    }
}

pub fn fit(
    kind: ClassifierKind,
    train: &FeatureTable,
    params: &ClassifierParams,
    seed: u64,
) -> Result<TrainedModel> {
    let labels = train.require_labels()?;
    let (n, d) = (train.n_samples(), train.n_features());
    if n == 0 {
        return Err(Error::InsufficientData("no training samples".into()));
    }
    if d == 0 {
        return Err(Error::InsufficientData("no features to train on".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let both = n_pos > 0 && n_pos < n;
    if !both && matches!(kind, ClassifierKind::Nb | ClassifierKind::Lssvm) {
        return Err(Error::InsufficientData(format!(
            "{kind} needs both classes in the training data"
        )));
    }

    let standardize = matches!(
        kind,
        ClassifierKind::Nb | ClassifierKind::Lssvm | ClassifierKind::Nn1
    );
    let standardizer = standardize.then(|| Standardizer::fit(train));
    let rows: Vec<Vec<f64>> = match &standardizer {
        Some(s) => train.rows().map(|r| s.transform(r)).collect(),
        None => train.rows().map(<[f64]>::to_vec).collect(),
    };

    let body = match kind {
        ClassifierKind::Nb => ModelBody::Nb(GaussianNb::fit(&rows, labels)),
        ClassifierKind::Lssvm => ModelBody::Lssvm(LsSvm::fit(&rows, labels, params.svm_gamma)?),
        ClassifierKind::Dtree => {
            ModelBody::Dtree(DecisionTree::fit(&rows, labels, &params.tree_params()))
        }
        ClassifierKind::Rforest => {
            ModelBody::Rforest(RandomForest::fit(&rows, labels, params, seed)?)
        }
        ClassifierKind::Nn1 => ModelBody::Nn1(NearestNeighbor::fit(rows, labels)),
    };
    Ok(TrainedModel {
        n_features: d,
        standardizer,
        body,
    })
}

pub fn predict(model: &TrainedModel, sample: &[f64]) -> Result<Prediction> {
    if sample.len() != model.n_features {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} features, sample has {}",
            model.n_features,
            sample.len()
        )));
    }
    let x = match &model.standardizer {
        Some(s) => s.transform(sample),
        None => sample.to_vec(),
    };
    let score = match &model.body {
        ModelBody::Nb(m) => m.score(&x),
        ModelBody::Lssvm(m) => m.score(&x),
        ModelBody::Dtree(m) => m.score(&x),
        ModelBody::Rforest(m) => m.score(&x),
        ModelBody::Nn1(m) => m.score(&x),
    };
    Ok(Prediction::from_score(score))
}

/// Predictions for every row of `table`.
pub fn predict_table(model: &TrainedModel, table: &FeatureTable) -> Result<Vec<Prediction>> {
    table.rows().map(|r| predict(model, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy(rows: &[(f64, f64, u8)]) -> FeatureTable {
        FeatureTable::new(
            (0..rows.len()).map(|i| i.to_string()).collect(),
            vec!["a".into(), "b".into()],
            rows.iter().flat_map(|r| [r.0, r.1]).collect(),
            Some(rows.iter().map(|r| r.2).collect()),
        )
        .unwrap()
    }

    #[test]
    fn nb_duplicated_points() {
        let mut rows = Vec::new();
        for _ in 0..5 {
            rows.push((0.0, 0.0, 0));
            rows.push((1.0, 0.0, 1));
        }
        let t = toy(&rows);
        let m = fit(ClassifierKind::Nb, &t, &ClassifierParams::default(), 1).unwrap();
        for (row, &l) in t.rows().zip(t.labels().unwrap()) {
            assert_eq!(m.predict(row).unwrap().label, l);
        }
    }

    #[test]
    fn pure_set_single_leaf() {
        let t = toy(&[(0.0, 1.0, 1), (2.0, 3.0, 1), (4.0, -1.0, 1)]);
        let m = fit(ClassifierKind::Dtree, &t, &ClassifierParams::default(), 0).unwrap();
        match &m.body {
            ModelBody::Dtree(tree) => assert_eq!(tree.n_nodes(), 1),
            _ => unreachable!(),
        }
        let p = m.predict(&[9.0, 9.0]).unwrap();
        assert_eq!((p.label, p.score), (1, 1.0));
        assert!(fit(ClassifierKind::Nb, &t, &ClassifierParams::default(), 0).is_err());
        assert!(fit(ClassifierKind::Lssvm, &t, &ClassifierParams::default(), 0).is_err());
        let nn = fit(ClassifierKind::Nn1, &t, &ClassifierParams::default(), 0).unwrap();
        assert_eq!(nn.predict(&[0.0, 0.0]).unwrap().score, 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let t = toy(&[(0.0, 1.0, 0), (2.0, 3.0, 1)]);
        for kind in ClassifierKind::ALL {
            let m = fit(kind, &t, &ClassifierParams::default(), 0).unwrap();
            assert!(m.predict(&[1.0]).is_err());
        }
    }

    #[test]
    fn threshold_rule() {
        assert_eq!(Prediction::from_score(0.5).label, 1);
        assert_eq!(Prediction::from_score(0.4999).label, 0);
    }

    #[test]
    fn kind_names() {
        for (flag, kind) in [
            ("nb", ClassifierKind::Nb),
            ("svm", ClassifierKind::Lssvm),
            ("dtree", ClassifierKind::Dtree),
            ("rf", ClassifierKind::Rforest),
            ("nn1", ClassifierKind::Nn1),
        ] {
            assert_eq!(ClassifierKind::from_name(flag).unwrap(), kind);
            assert_eq!(ClassifierKind::from_name(kind.name()).unwrap(), kind);
        }
    }

    #[test]
    fn otmd_round_trip() {
        let t = toy(&[(0.0, 1.0, 0), (2.0, 3.0, 1), (0.3, 0.7, 0), (2.2, 2.9, 1)]);
        for kind in ClassifierKind::ALL {
            let m = fit(kind, &t, &ClassifierParams { trees: 5, ..Default::default() }, 3).unwrap();
            let back = TrainedModel::from_otmd_bytes(&m.to_otmd_bytes().unwrap()).unwrap();
            assert_eq!(back, m);
        }
    }
}
