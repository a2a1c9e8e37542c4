//! Traditional texture descriptors: co-occurrence statistics, local binary
//! patterns and run-length statistics.

pub mod glcm;
pub mod glrlm;
pub mod lbp;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{quantize, GrayImage};

pub use glcm::{compute_glcm, extract_glcm_features, glcm_stats, Glcm, GLCM_OFFSETS, GLCM_STATS};
pub use glrlm::{compute_glrlm, glrlm_features, Direction, RunLengthMatrix, GLRLM_STATS};
pub use lbp::{compute_lbp_image, lbp_features, LbpMode};

/// Named per-image descriptor values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} names for {} values",
                names.len(),
                values.len()
            )));
        }
        let mut seen = HashSet::with_capacity(names.len());
        for (n, v) in names.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "feature {n} is not finite ({v})"
                )));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate feature {n}")));
            }
        }
        Ok(FeatureVector { names, values })
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) -> Result<()> {
        let name = name.into();
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "feature {name} is not finite ({value})"
            )));
        }
        if self.names.contains(&name) {
            return Err(Error::InvalidArgument(format!("duplicate feature {name}")));
        }
        self.names.push(name);
        self.values.push(value);
        Ok(())
    }

    /// Appends every feature of `other`, prefixing each name.
    pub fn extend_prefixed(&mut self, prefix: &str, other: FeatureVector) -> Result<()> {
        for (n, v) in other.names.into_iter().zip(other.values) {
            self.push(format!("{prefix}{n}"), v)?;
        }
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

/// Gray-level counts used before co-occurrence and run-length counting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraditionalConfig {
    pub glcm_levels: usize,
    pub glrlm_levels: usize,
}

impl Default for TraditionalConfig {
    fn default() -> Self {
        TraditionalConfig {
            glcm_levels: 8,
            glrlm_levels: 8,
        }
    }
}

/// The full traditional descriptor: 44 GLCM statistics, the 256-bin LBP
/// histogram, the LBP mean code and 5 run-length statistics for each of the
/// four directions (321 values).
pub fn extract_traditional(img: &GrayImage, cfg: &TraditionalConfig) -> Result<FeatureVector> {
    let mut fv = extract_glcm_features(img, cfg.glcm_levels)?;

    let codes = compute_lbp_image(img)?;
    fv.extend_prefixed("", lbp_features(&codes, LbpMode::Histogram)?)?;
    fv.extend_prefixed("", lbp_features(&codes, LbpMode::Scalar)?)?;

    let q = quantize(img, cfg.glrlm_levels)?;
    let n_pixels = img.width() * img.height();
    for dir in Direction::ALL {
        let m = compute_glrlm(&q, dir);
        fv.extend_prefixed(
            &format!("glrlm_a{}_", dir.degrees()),
            glrlm_features(&m, n_pixels)?,
        )?;
    }
    Ok(fv)
}

/// Column names of [`extract_traditional`], in order.
pub fn traditional_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(321);
    for (angle, _) in GLCM_OFFSETS {
        names.extend(GLCM_STATS.iter().map(|s| format!("glcm_a{angle}_{s}")));
    }
    names.extend((0..256).map(|b| format!("lbp_h{b:03}")));
    names.push("lbp_mean".into());
    for dir in Direction::ALL {
        names.extend(GLRLM_STATS.iter().map(|s| format!("glrlm_a{}_{s}", dir.degrees())));
    }
    names
}
