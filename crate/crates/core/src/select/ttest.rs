use super::RankedFeatures;
use crate::error::{Error, Result};
use crate::table::FeatureTable;

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t statistic, `(mean1 - mean0) / sqrt(v1/n1 + v0/n0)`.
///
/// With zero variance in both groups the statistic is 0 for equal means and
/// `±inf` otherwise.
pub fn welch_t(class0: &[f64], class1: &[f64]) -> Result<f64> {
    if class0.len() < 2 || class1.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "t-test needs at least 2 samples per class, got {} and {}",
            class0.len(),
            class1.len()
        )));
    }
    let (m0, v0) = mean_var(class0);
    let (m1, v1) = mean_var(class1);
    let se2 = v1 / class1.len() as f64 + v0 / class0.len() as f64;
    let diff = m1 - m0;
    if se2 == 0.0 {
        return Ok(if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        });
    }
    Ok(diff / se2.sqrt())
}

/// Ranks features by `|t|`. Perfectly separated zero-variance features score
/// `+inf` and so rank first.
pub fn ttest_scores(table: &FeatureTable) -> Result<RankedFeatures> {
    let labels = table.require_labels()?;
    let mut scores = Vec::with_capacity(table.n_features());
    for j in 0..table.n_features() {
        let col = table.column(j);
        let (mut c0, mut c1) = (Vec::new(), Vec::new());
        for (v, &l) in col.into_iter().zip(labels) {
            if l == 0 {
                c0.push(v)
            } else {
                c1.push(v)
            }
        }
        scores.push(welch_t(&c0, &c1)?.abs());
    }
    if table.n_features() == 0 {
        let n1 = labels.iter().filter(|&&l| l == 1).count();
        welch_t(&vec![0.0; labels.len() - n1], &vec![0.0; n1])?;
    }
    RankedFeatures::from_scores(scores)
}
