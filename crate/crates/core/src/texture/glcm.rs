//! Gray-level co-occurrence matrices and Haralick-family statistics.
//!
//! Offsets are `(dx, dy)` with `dx` along columns and `dy` along rows (down
//! is positive), so the four standard angles at distance 1 are
//! 0° = (1, 0), 45° = (1, -1), 90° = (0, -1) and 135° = (-1, -1).
//! Gray levels enter the statistics as their 0-based bin index.

use super::FeatureVector;
use crate::error::{Error, Result};
use crate::image::{quantize, GrayImage, QuantizedImage};

/// (angle in degrees, offset) for the four standard directions.
pub const GLCM_OFFSETS: [(u32, (isize, isize)); 4] =
    [(0, (1, 0)), (45, (1, -1)), (90, (0, -1)), (135, (-1, -1))];

/// Statistic names in output order.
pub const GLCM_STATS: [&str; 11] = [
    "contrast",
    "dissimilarity",
    "homogeneity",
    "energy",
    "entropy",
    "correlation",
    "max_probability",
    "cluster_shade",
    "cluster_prominence",
    "autocorrelation",
    "variance",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Glcm {
    levels: usize,
    offset: (isize, isize),
    symmetric: bool,
    counts: Vec<u64>,
    probs: Vec<f64>,
}

impl Glcm {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn offset(&self) -> (isize, isize) {
        self.offset
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Row-major `levels x levels` pair counts (reference level is the row).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.levels + b]
    }

    #[inline]
    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.levels + b]
    }

    /// Builds a matrix directly from a normalized distribution; mostly useful
    /// for exercising [`glcm_stats`] on hand-written cases.
    pub fn from_probs(levels: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != levels * levels {
            return Err(Error::InvalidArgument(format!(
                "{levels} levels need {} cells, got {}",
                levels * levels,
                probs.len()
            )));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(
                "probabilities must be nonnegative and sum to 1".into(),
            ));
        }
        Ok(Glcm {
            levels,
            offset: (0, 0),
            symmetric: false,
            counts: vec![0; levels * levels],
            probs,
        })
    }
}

pub fn compute_glcm(
    qimg: &QuantizedImage,
    offset: (isize, isize),
    symmetric: bool,
) -> Result<Glcm> {
    let (dx, dy) = offset;
    let (w, h) = (qimg.width() as isize, qimg.height() as isize);
    if offset == (0, 0) {
        return Err(Error::InvalidArgument("degenerate GLCM offset (0, 0)".into()));
    }
    if dx.abs() >= w || dy.abs() >= h {
        return Err(Error::InvalidDimensions(format!(
            "{w}x{h} image contains no pixel pair at offset ({dx}, {dy})"
        )));
    }
    let levels = qimg.levels();
    let mut counts = vec![0u64; levels * levels];

    let (x0, x1) = (0.max(-dx), w.min(w - dx));
    let (y0, y1) = (0.max(-dy), h.min(h - dy));
    for y in y0..y1 {
        for x in x0..x1 {
            let a = qimg.get(x as usize, y as usize);
            let b = qimg.get((x + dx) as usize, (y + dy) as usize);
            counts[a * levels + b] += 1;
        }
    }
    if symmetric {
        for a in 0..levels {
            for b in (a + 1)..levels {
                let s = counts[a * levels + b] + counts[b * levels + a];
                counts[a * levels + b] = s;
                counts[b * levels + a] = s;
            }
            counts[a * levels + a] *= 2;
        }
    }

    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidDimensions("no pixel pairs counted".into()));
    }
    let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(Glcm {
        levels,
        offset,
        symmetric,
        counts,
        probs,
    })
}

/// The eleven statistics of [`GLCM_STATS`], in that order.
///
/// Energy is the angular second moment, homogeneity the inverse difference
/// moment `p / (1 + (i - j)^2)`, entropy is in bits, variance is the
/// row-marginal sum-of-squares variance. Correlation is 0 when either
/// marginal variance is 0.
pub fn glcm_stats(g: &Glcm) -> FeatureVector {
    let l = g.levels;
    let mut row_marg = vec![0f64; l];
    let mut col_marg = vec![0f64; l];
    for i in 0..l {
        for j in 0..l {
            let p = g.prob(i, j);
            row_marg[i] += p;
            col_marg[j] += p;
        }
    }
    let mean = |m: &[f64]| m.iter().enumerate().map(|(i, p)| i as f64 * p).sum::<f64>();
    let mu_i = mean(&row_marg);
    let mu_j = mean(&col_marg);
    let var = |m: &[f64], mu: f64| {
        m.iter()
            .enumerate()
            .map(|(i, p)| (i as f64 - mu).powi(2) * p)
            .sum::<f64>()
    };
    let var_i = var(&row_marg, mu_i);
    let var_j = var(&col_marg, mu_j);

    let mut s = [0f64; 11];
    let mut cov = 0.0;
    let mut max_p = 0f64;
    for i in 0..l {
        for j in 0..l {
            let p = g.prob(i, j);
            if p == 0.0 {
                continue;
            }
            let (fi, fj) = (i as f64, j as f64);
            let d = fi - fj;
            s[0] += d * d * p;
            s[1] += d.abs() * p;
            s[2] += p / (1.0 + d * d);
            s[3] += p * p;
            s[4] -= p * p.log2();
            cov += (fi - mu_i) * (fj - mu_j) * p;
            max_p = max_p.max(p);
            let c = fi + fj - mu_i - mu_j;
            s[7] += c.powi(3) * p;
            s[8] += c.powi(4) * p;
            s[9] += fi * fj * p;
        }
    }
    s[5] = if var_i > 0.0 && var_j > 0.0 {
        (cov / (var_i * var_j).sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    s[6] = max_p;
    s[10] = var_i;
    // entropy of a single-cell distribution is -0.0 otherwise
    s[4] = s[4].max(0.0);

    let mut fv = FeatureVector::new();
    for (name, v) in GLCM_STATS.iter().zip(s) {
        fv.push(*name, v).expect("statistic names are unique");
    }
    fv
}

/// 11 statistics x 4 angles (distance 1, symmetric) = 44 features, angle-major.
/// Names are `glcm_a{angle}_{statistic}`.
pub fn extract_glcm_features(img: &GrayImage, levels: usize) -> Result<FeatureVector> {
    if img.width() < 2 || img.height() < 2 {
        return Err(Error::InvalidDimensions(format!(
            "GLCM features need at least a 2x2 image, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let q = quantize(img, levels)?;
    let mut fv = FeatureVector::new();
    for (angle, offset) in GLCM_OFFSETS {
        let g = compute_glcm(&q, offset, true)?;
        fv.extend_prefixed(&format!("glcm_a{angle}_"), glcm_stats(&g))?;
    }
    Ok(fv)
}
