use rayon::prelude::*;

use super::RankedFeatures;
use crate::error::{Error, Result};
use crate::table::FeatureTable;

/// Relief-F weights for a two-class table, one deterministic pass over every
/// instance.
///
/// Features are range-normalized so `diff(f, a, b) = |a_f - b_f| / range_f`
/// (0 for constant features), distances are Manhattan over the normalized
/// features, and each instance contributes
/// `(sum over k misses - sum over k hits) / (n k)`. Neighbor ties are broken
/// by sample index.
pub fn relieff_weights(table: &FeatureTable, neighbors: usize) -> Result<Vec<f64>> {
    let labels = table.require_labels()?;
    let (n, d) = (table.n_samples(), table.n_features());
    if neighbors == 0 {
        return Err(Error::InvalidArgument("Relief-F needs k >= 1".into()));
    }
    for class in [0u8, 1] {
        let size = labels.iter().filter(|&&l| l == class).count();
        if size <= neighbors {
            return Err(Error::InsufficientData(format!(
                "class {class} has {size} samples; Relief-F with k = {neighbors} needs more than {neighbors}"
            )));
        }
    }

    let mut norm = vec![0f64; n * d];
    for j in 0..d {
        let col = table.column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        if range > 0.0 {
            for (i, v) in col.iter().enumerate() {
                norm[i * d + j] = (v - lo) / range;
            }
        }
    }
    let row = |i: usize| &norm[i * d..(i + 1) * d];
    let dist = |a: usize, b: usize| -> f64 {
        row(a).iter().zip(row(b)).map(|(x, y)| (x - y).abs()).sum()
    };

    // per-instance contributions, reduced in instance order afterwards
    let contributions: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut hits: Vec<(f64, usize)> = Vec::new();
            let mut misses: Vec<(f64, usize)> = Vec::new();
            for o in (0..n).filter(|&o| o != i) {
                let e = (dist(i, o), o);
                if labels[o] == labels[i] {
                    hits.push(e);
                } else {
                    misses.push(e);
                }
            }
            let by_distance = |a: &(f64, usize), b: &(f64, usize)| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
            };
            hits.sort_by(by_distance);
            misses.sort_by(by_distance);
            let mut w = vec![0f64; d];
            for &(_, m) in &misses[..neighbors] {
                for (wf, (a, b)) in w.iter_mut().zip(row(i).iter().zip(row(m))) {
                    *wf += (a - b).abs();
                }
            }
            for &(_, h) in &hits[..neighbors] {
                for (wf, (a, b)) in w.iter_mut().zip(row(i).iter().zip(row(h))) {
                    *wf -= (a - b).abs();
                }
            }
            w
        })
        .collect();

    let scale = (n * neighbors) as f64;
    let mut weights = vec![0f64; d];
    for c in contributions {
        for (w, v) in weights.iter_mut().zip(c) {
            *w += v / scale;
        }
    }
    Ok(weights)
}

pub fn relieff(table: &FeatureTable, neighbors: usize) -> Result<RankedFeatures> {
    RankedFeatures::from_scores(relieff_weights(table, neighbors)?)
}
