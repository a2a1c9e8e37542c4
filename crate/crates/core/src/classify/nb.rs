use serde::{Deserialize, Serialize};

const VAR_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with class-frequency priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    log_prior: [f64; 2],
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
}

impl GaussianNb {
    /// Both classes must be present.
    pub(crate) fn fit(rows: &[Vec<f64>], labels: &[u8]) -> Self {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mut count = [0f64; 2];
        let mut mean = [vec![0f64; d], vec![0f64; d]];
        for (r, &l) in rows.iter().zip(labels) {
            let c = l as usize;
            count[c] += 1.0;
            for (m, v) in mean[c].iter_mut().zip(r) {
                *m += v;
            }
        }
        for c in 0..2 {
            mean[c].iter_mut().for_each(|m| *m /= count[c]);
        }
        let mut var = [vec![0f64; d], vec![0f64; d]];
        for (r, &l) in rows.iter().zip(labels) {
            let c = l as usize;
            for ((s, m), v) in var[c].iter_mut().zip(&mean[c]).zip(r) {
                *s += (v - m).powi(2);
            }
        }
        for c in 0..2 {
            var[c]
                .iter_mut()
                .for_each(|s| *s = (*s / count[c]).max(VAR_FLOOR));
        }
        GaussianNb {
            log_prior: [(count[0] / n).ln(), (count[1] / n).ln()],
            mean,
            var,
        }
    }

    pub(crate) fn log_joint(&self, x: &[f64], class: usize) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.log_prior[class]
            + x.iter()
                .zip(self.mean[class].iter().zip(&self.var[class]))
                .map(|(v, (m, s))| -0.5 * (ln_2pi + s.ln() + (v - m).powi(2) / s))
                .sum::<f64>()
    }

    /// Posterior probability of class 1.
    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        let diff = self.log_joint(x, 0) - self.log_joint(x, 1);
        // 1 / (1 + exp(diff)) without overflow
        if diff > 0.0 {
            let e = (-diff).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + diff.exp())
        }
    }
}
