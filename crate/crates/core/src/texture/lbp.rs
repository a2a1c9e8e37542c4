//! Basic 3x3 local binary patterns.

use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::error::{Error, Result};
use crate::image::{GrayImage, QuantizedImage};

/// Neighbor offsets clockwise from the top-left; the first entry is the
/// most significant bit of the code.
const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// Code image over the interior pixels, `(w - 2) x (h - 2)`, 256 levels.
/// A neighbor contributes a 1 bit when it is greater than or equal to the
/// center.
pub fn compute_lbp_image(img: &GrayImage) -> Result<QuantizedImage> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::InvalidDimensions(format!(
            "LBP needs at least a 3x3 image, got {w}x{h}"
        )));
    }
    let mut codes = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let c = img.get(x, y);
            let code = NEIGHBORS.iter().fold(0u16, |acc, &(dx, dy)| {
                let n = img.get((x as isize + dx) as usize, (y as isize + dy) as usize);
                (acc << 1) | u16::from(n >= c)
            });
            codes.push(code);
        }
    }
    QuantizedImage::new(w - 2, h - 2, 256, codes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LbpMode {
    /// Normalized 256-bin code histogram, `lbp_h000` .. `lbp_h255`.
    Histogram,
    /// The mean code as a single feature, `lbp_mean`.
    Scalar,
}

pub fn lbp_features(codes: &QuantizedImage, mode: LbpMode) -> Result<FeatureVector> {
    let n = codes.data().len();
    if n == 0 {
        return Err(Error::InvalidDimensions("empty LBP code image".into()));
    }
    let mut fv = FeatureVector::new();
    match mode {
        LbpMode::Histogram => {
            let mut hist = [0u64; 256];
            for &c in codes.data() {
                hist[c as usize] += 1;
            }
            for (bin, count) in hist.iter().enumerate() {
                fv.push(format!("lbp_h{bin:03}"), *count as f64 / n as f64)?;
            }
        }
        LbpMode::Scalar => {
            let sum: u64 = codes.data().iter().map(|&c| c as u64).sum();
            fv.push("lbp_mean", sum as f64 / n as f64)?;
        }
    }
    Ok(fv)
}
