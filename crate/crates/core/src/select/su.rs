use std::collections::BTreeMap;

use rayon::prelude::*;

use super::RankedFeatures;
use crate::error::{Error, Result};
use crate::table::FeatureTable;

/// Shannon entropy in bits of a discrete column (`0 log 0 = 0`).
pub fn entropy<T: Ord>(column: &[T]) -> Result<f64> {
    if column.is_empty() {
        return Err(Error::InvalidArgument("entropy of an empty column".into()));
    }
    let mut counts: BTreeMap<&T, usize> = BTreeMap::new();
    for v in column {
        *counts.entry(v).or_default() += 1;
    }
    Ok(entropy_of_counts(counts.values().copied(), column.len()))
}

fn entropy_of_counts(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    let h: f64 = counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Equal-frequency binning. Cut points sit at the quantiles of the
/// `fit_rows` values (midway between neighbors); every row of `column` is
/// then mapped through them. Coinciding cut points merge, so fewer than
/// `bins` bins may be produced.
pub fn discretize_equal_frequency(
    column: &[f64],
    bins: usize,
    fit_rows: &[usize],
) -> Result<Vec<u32>> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if fit_rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to fit bins on".into()));
    }
    let mut fit: Vec<f64> = fit_rows
        .iter()
        .map(|&r| {
            column.get(r).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("fit row {r} out of range"))
            })
        })
        .collect::<Result<_>>()?;
    fit.sort_by(f64::total_cmp);
    let m = fit.len();

    let mut edges: Vec<f64> = Vec::with_capacity(bins - 1);
    for b in 1..bins {
        let c = b * m / bins;
        if c == 0 || c >= m {
            continue;
        }
        let (lo, hi) = (fit[c - 1], fit[c]);
        let mid = lo + (hi - lo) / 2.0;
        edges.push(if mid < hi { mid } else { lo });
    }
    edges.dedup();

    Ok(column
        .iter()
        .map(|v| edges.partition_point(|e| v > e) as u32)
        .collect())
}

/// `2 (H(C) - H(C|A)) / (H(C) + H(A))`, entropies in bits; 0 when both
/// entropies vanish.
pub fn symmetric_uncertainty(attr: &[u32], class: &[u8]) -> Result<f64> {
    if attr.len() != class.len() {
        return Err(Error::InvalidArgument(format!(
            "attribute has {} values, class has {}",
            attr.len(),
            class.len()
        )));
    }
    if attr.is_empty() {
        return Err(Error::InvalidArgument("empty columns".into()));
    }
    let n = attr.len();
    let h_class = entropy(class)?;
    let h_attr = entropy(attr)?;

    let mut joint: BTreeMap<u32, BTreeMap<u8, usize>> = BTreeMap::new();
    for (&a, &c) in attr.iter().zip(class) {
        *joint.entry(a).or_default().entry(c).or_default() += 1;
    }
    let h_class_given_attr: f64 = joint
        .values()
        .map(|by_class| {
            let n_a: usize = by_class.values().sum();
            n_a as f64 / n as f64 * entropy_of_counts(by_class.values().copied(), n_a)
        })
        .sum();

    let denom = h_class + h_attr;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * (h_class - h_class_given_attr) / denom).clamp(0.0, 1.0))
}

/// Scores every feature by symmetric uncertainty against the labels after
/// equal-frequency discretization fit on all rows of `table`.
pub fn rank_su(table: &FeatureTable, bins: usize) -> Result<RankedFeatures> {
    let labels = table.require_labels()?;
    if table.n_samples() == 0 {
        return Err(Error::InsufficientData("empty table".into()));
    }
    let rows: Vec<usize> = (0..table.n_samples()).collect();
    let scores = (0..table.n_features())
        .into_par_iter()
        .map(|j| {
            let disc = discretize_equal_frequency(&table.column(j), bins, &rows)?;
            symmetric_uncertainty(&disc, labels)
        })
        .collect::<Result<Vec<f64>>>()?;
    RankedFeatures::from_scores(scores)
}
