use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::DecisionTree;
use super::ClassifierParams;
use crate::error::{Error, Result};

/// Bagged decision trees with per-split random feature subsets. Tree `t`
/// draws from a ChaCha8 stream seeded with `(seed, t)`, so training is
/// deterministic and independent of thread scheduling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub(crate) fn fit(
        rows: &[Vec<f64>],
        labels: &[u8],
        params: &ClassifierParams,
        seed: u64,
    ) -> Result<Self> {
        if params.trees == 0 {
            return Err(Error::InvalidArgument("random forest needs at least one tree".into()));
        }
        let n = rows.len();
        let d = rows[0].len();
        let m = params
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d);
        let tree_params = params.tree_params();

        let trees = (0..params.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let samples: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::grow_with(rows, labels, &samples, &tree_params, |d| {
                    if m >= d {
                        (0..d).collect()
                    } else {
                        let mut f = sample(&mut rng, d, m).into_vec();
                        f.sort_unstable();
                        f
                    }
                })
            })
            .collect();
        Ok(RandomForest { trees })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Fraction of trees voting for class 1.
    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        let votes = self
            .trees
            .iter()
            .filter(|t| t.score(x) >= super::DECISION_THRESHOLD)
            .count();
        votes as f64 / self.trees.len() as f64
    }
}
