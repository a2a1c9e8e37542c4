use serde::{Deserialize, Serialize};

/// 1-nearest neighbor over the stored (standardized) training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestNeighbor {
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl NearestNeighbor {
    pub(crate) fn fit(rows: Vec<Vec<f64>>, labels: &[u8]) -> Self {
        NearestNeighbor {
            rows,
            labels: labels.to_vec(),
        }
    }

    /// `d- / (d+ + d-)` with `d+`/`d-` the Euclidean distance to the nearest
    /// positive/negative point; 0.5 when both are zero.
    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        let mut nearest = [f64::INFINITY; 2];
        for (r, &l) in self.rows.iter().zip(&self.labels) {
            let d2: f64 = r.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
            let slot = &mut nearest[l as usize];
            *slot = slot.min(d2);
        }
        let (d_neg, d_pos) = (nearest[0].sqrt(), nearest[1].sqrt());
        match (d_neg.is_finite(), d_pos.is_finite()) {
            (false, _) => 1.0,
            (_, false) => 0.0,
            _ if d_neg + d_pos == 0.0 => 0.5,
            _ => d_neg / (d_neg + d_pos),
        }
    }
}
