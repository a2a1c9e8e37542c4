use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        positive_fraction: f64,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary threshold tree grown by information gain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Gains closer than this are treated as ties, which keep the earlier
/// (lower feature index, lower threshold) candidate.
const GAIN_TIE_EPS: f64 = 1e-12;

fn binary_entropy(pos: usize, total: usize) -> f64 {
    if pos == 0 || pos == total {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

struct Builder<'a, F> {
    rows: &'a [Vec<f64>],
    labels: &'a [u8],
    params: &'a TreeParams,
    candidates: F,
    nodes: Vec<Node>,
}

impl<F: FnMut(usize) -> Vec<usize>> Builder<'_, F> {
    fn grow(&mut self, samples: &[usize], depth: usize) -> usize {
        let n = samples.len();
        let pos = samples.iter().filter(|&&s| self.labels[s] == 1).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            positive_fraction: pos as f64 / n as f64,
        });
        if pos == 0
            || pos == n
            || n < self.params.min_samples_split
            || depth >= self.params.max_depth
        {
            return id;
        }
        let d = self.rows[0].len();
        let features = (self.candidates)(d);
        let Some((feature, threshold)) = self.best_split(samples, pos, &features) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| self.rows[s][feature] <= threshold);
        let left = self.grow(&l, depth + 1);
        let right = self.grow(&r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, samples: &[usize], pos: usize, features: &[usize]) -> Option<(usize, f64)> {
        let n = samples.len();
        let parent = binary_entropy(pos, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut vals: Vec<(f64, u8)> = Vec::with_capacity(n);
        for &f in features {
            vals.clear();
            vals.extend(samples.iter().map(|&s| (self.rows[s][f], self.labels[s])));
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for i in 0..n - 1 {
                left_pos += vals[i].1 as usize;
                let (lo, hi) = (vals[i].0, vals[i + 1].0);
                if lo == hi {
                    continue;
                }
                let nl = i + 1;
                let nr = n - nl;
                let child = (nl as f64 * binary_entropy(left_pos, nl)
                    + nr as f64 * binary_entropy(pos - left_pos, nr))
                    / n as f64;
                let gain = parent - child;
                if best.is_none_or(|(g, _, _)| gain > g + GAIN_TIE_EPS) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((gain, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl DecisionTree {
    pub(crate) fn fit(rows: &[Vec<f64>], labels: &[u8], params: &TreeParams) -> Self {
        let samples: Vec<usize> = (0..rows.len()).collect();
        Self::grow_with(rows, labels, &samples, params, |d| (0..d).collect())
    }

    /// Grows a tree on `samples` (repeats allowed), asking `candidates` for
    /// the features to consider at each split.
    pub(crate) fn grow_with(
        rows: &[Vec<f64>],
        labels: &[u8],
        samples: &[usize],
        params: &TreeParams,
        candidates: impl FnMut(usize) -> Vec<usize>,
    ) -> Self {
        let mut b = Builder {
            rows,
            labels,
            params,
            candidates,
            nodes: Vec::new(),
        };
        b.grow(samples, 0);
        DecisionTree { nodes: b.nodes }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Positive-label fraction of the reached leaf.
    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { positive_fraction } => return positive_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}
