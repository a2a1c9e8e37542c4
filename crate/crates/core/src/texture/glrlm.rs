//! Gray-level run-length matrices and Galloway's run statistics.

use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::error::{Error, Result};
use crate::image::QuantizedImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
    ];

    pub fn degrees(self) -> u32 {
        match self {
            Direction::Deg0 => 0,
            Direction::Deg45 => 45,
            Direction::Deg90 => 90,
            Direction::Deg135 => 135,
        }
    }

    /// Pixel step `(dx, dy)` along the scan, rows growing downward.
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::Deg0 => (1, 0),
            Direction::Deg45 => (1, -1),
            Direction::Deg90 => (0, -1),
            Direction::Deg135 => (-1, -1),
        }
    }
}

pub const GLRLM_STATS: [&str; 5] = ["sre", "lre", "gln", "rln", "rp"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunLengthMatrix {
    levels: usize,
    max_run: usize,
    direction: Direction,
    counts: Vec<u64>,
}

impl RunLengthMatrix {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn max_run(&self) -> usize {
        self.max_run
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Number of runs of gray level `level` with length `len` (1-based).
    pub fn count(&self, level: usize, len: usize) -> u64 {
        if len == 0 || len > self.max_run {
            return 0;
        }
        self.counts[level * self.max_run + len - 1]
    }

    pub fn total_runs(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Sum of run lengths, which equals the number of scanned pixels.
    pub fn covered_pixels(&self) -> u64 {
        self.counts
            .chunks(self.max_run)
            .flat_map(|row| row.iter().enumerate().map(|(j, &c)| (j as u64 + 1) * c))
            .sum()
    }
}

pub fn compute_glrlm(qimg: &QuantizedImage, direction: Direction) -> RunLengthMatrix {
    let (w, h) = (qimg.width() as isize, qimg.height() as isize);
    let levels = qimg.levels();
    let max_run = w.max(h) as usize;
    let mut counts = vec![0u64; levels * max_run];
    let (dx, dy) = direction.step();
    let inside = |x: isize, y: isize| x >= 0 && x < w && y >= 0 && y < h;

    for y0 in 0..h {
        for x0 in 0..w {
            // scan lines start at pixels without a predecessor
            if inside(x0 - dx, y0 - dy) {
                continue;
            }
            let (mut x, mut y) = (x0, y0);
            let mut current = qimg.get(x as usize, y as usize);
            let mut len = 0usize;
            while inside(x, y) {
                let v = qimg.get(x as usize, y as usize);
                if v == current {
                    len += 1;
                } else {
                    counts[current * max_run + len - 1] += 1;
                    current = v;
                    len = 1;
                }
                x += dx;
                y += dy;
            }
            counts[current * max_run + len - 1] += 1;
        }
    }
    RunLengthMatrix {
        levels,
        max_run,
        direction,
        counts,
    }
}

/// Short-run emphasis, long-run emphasis, gray-level non-uniformity,
/// run-length non-uniformity and run percentage, in that order.
pub fn glrlm_features(m: &RunLengthMatrix, n_pixels: usize) -> Result<FeatureVector> {
    let runs = m.total_runs();
    if runs == 0 {
        return Err(Error::InvalidArgument("run-length matrix has no runs".into()));
    }
    if n_pixels == 0 {
        return Err(Error::InvalidArgument("pixel count is zero".into()));
    }
    let nr = runs as f64;
    let mut sre = 0.0;
    let mut lre = 0.0;
    let mut gln = 0.0;
    let mut run_totals = vec![0f64; m.max_run];
    for level in 0..m.levels {
        let mut level_total = 0.0;
        for len in 1..=m.max_run {
            let c = m.count(level, len) as f64;
            if c == 0.0 {
                continue;
            }
            let j = len as f64;
            sre += c / (j * j);
            lre += c * j * j;
            level_total += c;
            run_totals[len - 1] += c;
        }
        gln += level_total * level_total;
    }
    let rln: f64 = run_totals.iter().map(|t| t * t).sum();

    FeatureVector::from_parts(
        GLRLM_STATS.iter().map(|s| s.to_string()).collect(),
        vec![sre / nr, lre / nr, gln / nr, rln / nr, nr / n_pixels as f64],
    )
}
