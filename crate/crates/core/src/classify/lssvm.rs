use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How many times gamma is divided by 10 when the system is singular.
const GAMMA_ESCALATIONS: usize = 6;

/// Linear-kernel least-squares SVM. The dual solution is folded into a
/// primal weight vector since the kernel is linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsSvm {
    weights: Vec<f64>,
    bias: f64,
    gamma: f64,
}

impl LsSvm {
    /// Solves
    ///
    /// ```text
    /// [ 0   y^T              ] [b]   [0]
    /// [ y   Omega + I/gamma  ] [a] = [1]
    /// ```
    ///
    /// with `y` in {-1, +1} and `Omega_ij = y_i y_j <x_i, x_j>`. A singular
    /// system is retried with gamma / 10, up to six times.
    pub(crate) fn fit(rows: &[Vec<f64>], labels: &[u8], gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "LS-SVM gamma must be positive, got {gamma}"
            )));
        }
        let n = rows.len();
        let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            y[i] * y[j] * rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum::<f64>()
        });
        let mut rhs = DVector::from_element(n + 1, 1.0);
        rhs[0] = 0.0;

        let mut g = gamma;
        for _ in 0..=GAMMA_ESCALATIONS {
            let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
            for i in 0..n {
                a[(0, i + 1)] = y[i];
                a[(i + 1, 0)] = y[i];
                for j in 0..n {
                    a[(i + 1, j + 1)] = gram[(i, j)];
                }
                a[(i + 1, i + 1)] += 1.0 / g;
            }
            if let Some(sol) = a.lu().solve(&rhs) {
                if sol.iter().all(|v| v.is_finite()) {
                    let d = rows[0].len();
                    let mut weights = vec![0f64; d];
                    for i in 0..n {
                        let c = sol[i + 1] * y[i];
                        for (w, x) in weights.iter_mut().zip(&rows[i]) {
                            *w += c * x;
                        }
                    }
                    return Ok(LsSvm {
                        weights,
                        bias: sol[0],
                        gamma: g,
                    });
                }
            }
            g /= 10.0;
        }
        Err(Error::Singular(format!(
            "LS-SVM system singular down to gamma = {}",
            g * 10.0
        )))
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// Gamma actually used after any escalation.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        let f = self.decision(x);
        if f >= 0.0 {
            1.0 / (1.0 + (-f).exp())
        } else {
            let e = f.exp();
            e / (1.0 + e)
        }
    }
}
