//! Brute-force reference implementations and seeded data generators shared
//! by the integration tests. Everything here is written from the textbook
//! definitions and deliberately avoids the library's code paths.

#![allow(dead_code)]

use osteotex::image::GrayImage;
use osteotex::table::FeatureTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    GrayImage::new(w, h, (0..w * h).map(|_| r.random::<u8>()).collect()).unwrap()
}

pub fn random_f32(n: usize, r: &mut ChaCha8Rng) -> Vec<f32> {
    (0..n).map(|_| r.random_range(-1.0f32..1.0)).collect()
}

// ---------------------------------------------------------------- image

fn keys(t: f64) -> f64 {
    let a = -0.5;
    let t = t.abs();
    if t < 1.0 {
        (a + 2.0) * t.powi(3) - (a + 3.0) * t.powi(2) + 1.0
    } else if t < 2.0 {
        a * t.powi(3) - 5.0 * a * t.powi(2) + 8.0 * a * t - 4.0 * a
    } else {
        0.0
    }
}

/// Direct 2-D sum over the 4x4 neighborhood, clamp-to-edge, pixel centers
/// aligned.
pub fn bicubic_oracle(img: &GrayImage, ow: usize, oh: usize) -> Vec<u8> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut out = Vec::with_capacity(ow * oh);
    for oy in 0..oh {
        let sy = (oy as f64 + 0.5) * h as f64 / oh as f64 - 0.5;
        let by = sy.floor() as i64;
        for ox in 0..ow {
            let sx = (ox as f64 + 0.5) * w as f64 / ow as f64 - 0.5;
            let bx = sx.floor() as i64;
            let mut acc = 0.0;
            for j in by - 1..=by + 2 {
                let wy = keys(sy - j as f64);
                let mut inner = 0.0;
                for i in bx - 1..=bx + 2 {
                    let px = img.get(i.clamp(0, w - 1) as usize, j.clamp(0, h - 1) as usize);
                    inner += keys(sx - i as f64) * px as f64;
                }
                acc += wy * inner;
            }
            out.push(acc.round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn quantize_oracle(img: &GrayImage, levels: usize) -> Vec<usize> {
    img.data()
        .iter()
        .map(|&v| ((v as f64) * levels as f64 / 256.0).floor() as usize)
        .collect()
}

// ---------------------------------------------------------------- texture

/// Counts every ordered pixel pair whose displacement equals `(dx, dy)`.
pub fn glcm_counts_oracle(
    q: &[usize],
    w: usize,
    h: usize,
    levels: usize,
    (dx, dy): (isize, isize),
    symmetric: bool,
) -> Vec<u64> {
    let mut m = vec![0u64; levels * levels];
    let n = w * h;
    for p in 0..n {
        for r in 0..n {
            let (px, py) = ((p % w) as isize, (p / w) as isize);
            let (rx, ry) = ((r % w) as isize, (r / w) as isize);
            if rx - px == dx && ry - py == dy {
                m[q[p] * levels + q[r]] += 1;
                if symmetric {
                    m[q[r] * levels + q[p]] += 1;
                }
            }
        }
    }
    m
}

/// The eleven GLCM statistics by direct summation over all cells, in the
/// library's documented order.
pub fn glcm_stats_oracle(p: &[f64], l: usize) -> [f64; 11] {
    let at = |i: usize, j: usize| p[i * l + j];
    let cells = || (0..l).flat_map(move |i| (0..l).map(move |j| (i, j)));
    let mu_i: f64 = cells().map(|(i, j)| i as f64 * at(i, j)).sum();
    let mu_j: f64 = cells().map(|(i, j)| j as f64 * at(i, j)).sum();
    let var_i: f64 = cells().map(|(i, j)| (i as f64 - mu_i).powi(2) * at(i, j)).sum();
    let var_j: f64 = cells().map(|(i, j)| (j as f64 - mu_j).powi(2) * at(i, j)).sum();
    let contrast = cells().map(|(i, j)| (i as f64 - j as f64).powi(2) * at(i, j)).sum();
    let dissimilarity = cells().map(|(i, j)| (i as f64 - j as f64).abs() * at(i, j)).sum();
    let homogeneity = cells()
        .map(|(i, j)| at(i, j) / (1.0 + (i as f64 - j as f64).powi(2)))
        .sum();
    let energy = cells().map(|(i, j)| at(i, j).powi(2)).sum();
    let entropy = cells()
        .filter(|&(i, j)| at(i, j) > 0.0)
        .map(|(i, j)| -at(i, j) * at(i, j).log2())
        .sum();
    let correlation = if var_i > 0.0 && var_j > 0.0 {
        cells()
            .map(|(i, j)| (i as f64 - mu_i) * (j as f64 - mu_j) * at(i, j))
            .sum::<f64>()
            / (var_i * var_j).sqrt()
    } else {
        0.0
    };
    let max_probability = p.iter().copied().fold(0.0, f64::max);
    let shade = cells()
        .map(|(i, j)| (i as f64 + j as f64 - mu_i - mu_j).powi(3) * at(i, j))
        .sum();
    let prominence = cells()
        .map(|(i, j)| (i as f64 + j as f64 - mu_i - mu_j).powi(4) * at(i, j))
        .sum();
    let autocorrelation = cells().map(|(i, j)| (i * j) as f64 * at(i, j)).sum();
    [
        contrast,
        dissimilarity,
        homogeneity,
        energy,
        entropy,
        correlation,
        max_probability,
        shade,
        prominence,
        autocorrelation,
        var_i,
    ]
}

/// Codes for interior pixels, built bit by bit from the explicit neighbor
/// list (top-left first, clockwise, most significant bit first).
pub fn lbp_oracle(img: &GrayImage) -> Vec<u16> {
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let c = img.get(x, y);
            let ring = [
                img.get(x - 1, y - 1),
                img.get(x, y - 1),
                img.get(x + 1, y - 1),
                img.get(x + 1, y),
                img.get(x + 1, y + 1),
                img.get(x, y + 1),
                img.get(x - 1, y + 1),
                img.get(x - 1, y),
            ];
            let mut code = 0u16;
            for (bit, &n) in ring.iter().enumerate() {
                if n >= c {
                    code += 1 << (7 - bit);
                }
            }
            out.push(code);
        }
    }
    out
}

/// Run counts `[level][len - 1]`: a run starts at every pixel whose
/// predecessor along `step` is outside the image or differs in level, and
/// is measured by walking forward.
pub fn glrlm_oracle(
    q: &[usize],
    w: usize,
    h: usize,
    levels: usize,
    (sx, sy): (isize, isize),
) -> Vec<Vec<u64>> {
    let max_run = w.max(h);
    let mut m = vec![vec![0u64; max_run]; levels];
    let at = |x: isize, y: isize| -> Option<usize> {
        (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h)
            .then(|| q[y as usize * w + x as usize])
    };
    for y in 0..h as isize {
        for x in 0..w as isize {
            let v = at(x, y).unwrap();
            if at(x - sx, y - sy) == Some(v) {
                continue;
            }
            let mut len = 1;
            while at(x + sx * len as isize, y + sy * len as isize) == Some(v) {
                len += 1;
            }
            m[v][len - 1] += 1;
        }
    }
    m
}

/// `[sre, lre, gln, rln, rp]`.
pub fn glrlm_stats_oracle(m: &[Vec<u64>], n_pixels: usize) -> [f64; 5] {
    let runs: f64 = m.iter().flatten().map(|&c| c as f64).sum();
    let mut sre = 0.0;
    let mut lre = 0.0;
    for row in m {
        for (j, &c) in row.iter().enumerate() {
            let len = (j + 1) as f64;
            sre += c as f64 / (len * len);
            lre += c as f64 * len * len;
        }
    }
    let gln: f64 = m
        .iter()
        .map(|row| row.iter().sum::<u64>() as f64)
        .map(|s| s * s)
        .sum();
    let max_run = m[0].len();
    let rln: f64 = (0..max_run)
        .map(|j| m.iter().map(|row| row[j]).sum::<u64>() as f64)
        .map(|s| s * s)
        .sum();
    [sre / runs, lre / runs, gln / runs, rln / runs, runs / n_pixels as f64]
}

// ---------------------------------------------------------------- cnn

/// Tensors here are `[c][y][x]` flattened; weights `[o][c][ky][kx]`.
pub struct ConvCase {
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub out: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    /// top, bottom, left, right
    pub pad: [usize; 4],
}

pub fn conv_oracle(
    x: &[f32],
    wts: &[f32],
    bias: &[f32],
    k: &ConvCase,
) -> (usize, usize, Vec<f64>) {
    let [pt, pb, pl, pr] = k.pad;
    let oh = (k.h + pt + pb - k.kh) / k.stride + 1;
    let ow = (k.w + pl + pr - k.kw) / k.stride + 1;
    let mut out = vec![0f64; k.out * oh * ow];
    for o in 0..k.out {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = bias[o] as f64;
                for c in 0..k.c {
                    for ky in 0..k.kh {
                        for kx in 0..k.kw {
                            let iy = (oy * k.stride + ky) as isize - pt as isize;
                            let ix = (ox * k.stride + kx) as isize - pl as isize;
                            if iy < 0 || ix < 0 || iy >= k.h as isize || ix >= k.w as isize {
                                continue;
                            }
                            let xv = x[(c * k.h + iy as usize) * k.w + ix as usize] as f64;
                            let wv = wts[((o * k.c + c) * k.kh + ky) * k.kw + kx] as f64;
                            acc += xv * wv;
                        }
                    }
                }
                out[(o * oh + oy) * ow + ox] = acc;
            }
        }
    }
    (oh, ow, out)
}

pub fn maxpool_oracle(
    x: &[f32],
    h: usize,
    w: usize,
    c: usize,
    window: usize,
    stride: usize,
    [pt, pb, pl, pr]: [usize; 4],
) -> (usize, usize, Vec<f32>) {
    let oh = (h + pt + pb - window) / stride + 1;
    let ow = (w + pl + pr - window) / stride + 1;
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = f32::NEG_INFINITY;
                for dy in 0..window {
                    for dx in 0..window {
                        let iy = (oy * stride + dy) as isize - pt as isize;
                        let ix = (ox * stride + dx) as isize - pl as isize;
                        if iy >= 0 && ix >= 0 && (iy as usize) < h && (ix as usize) < w {
                            best = best.max(x[(ch * h + iy as usize) * w + ix as usize]);
                        }
                    }
                }
                out.push(best);
            }
        }
    }
    (oh, ow, out)
}

pub fn lrn_oracle(
    x: &[f32],
    hw: usize,
    c: usize,
    size: usize,
    alpha: f64,
    beta: f64,
    k: f64,
) -> Vec<f64> {
    let half = (size / 2) as isize;
    let mut out = vec![0f64; x.len()];
    for ch in 0..c as isize {
        for p in 0..hw {
            let mut s = 0.0;
            for j in ch - half..=ch + half {
                if j >= 0 && j < c as isize {
                    let v = x[j as usize * hw + p] as f64;
                    s += v * v;
                }
            }
            let v = x[ch as usize * hw + p] as f64;
            out[ch as usize * hw + p] = v / (k + alpha * s).powf(beta);
        }
    }
    out
}

pub fn fc_oracle(x: &[f32], w: &[f32], b: &[f32]) -> Vec<f64> {
    let n_in = x.len();
    (0..b.len())
        .map(|o| {
            b[o] as f64
                + (0..n_in)
                    .map(|i| w[o * n_in + i] as f64 * x[i] as f64)
                    .sum::<f64>()
        })
        .collect()
}

pub fn softmax_oracle(v: &[f64]) -> Vec<f64> {
    let exps: Vec<f64> = v.iter().map(|x| x.exp()).collect();
    let s: f64 = exps.iter().sum();
    exps.iter().map(|e| e / s).collect()
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

// ---------------------------------------------------------------- data

/// Two Gaussian classes whose means differ by `sep` standard deviations in
/// every dimension. Labels alternate 0, 1, 0, ...
pub fn gaussian_table(n: usize, d: usize, sep: f64, seed: u64) -> FeatureTable {
    let mut r = rng(seed);
    let normal = Normal::<f64>::new(0.0, 1.0).unwrap();
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let mut values = Vec::with_capacity(n * d);
    for &l in &labels {
        for _ in 0..d {
            values.push(normal.sample(&mut r) + sep * l as f64);
        }
    }
    FeatureTable::new(
        (0..n).map(|i| format!("s{i:03}")).collect(),
        (0..d).map(|j| format!("f{j}")).collect(),
        values,
        Some(labels),
    )
    .unwrap()
}

/// Smooth texture: a handful of wide Gaussian bumps on a mid-gray field.
pub fn blob_image(size: usize, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    let n_blobs = r.random_range(4..9);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..n_blobs)
        .map(|_| {
            (
                r.random_range(0.0..size as f64),
                r.random_range(0.0..size as f64),
                r.random_range(6.0..14.0),
                r.random_range(-90.0..90.0),
            )
        })
        .collect();
    let mut data = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let mut v = 128.0;
            for &(cx, cy, s, a) in &blobs {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                v += a * (-d2 / (2.0 * s * s)).exp();
            }
            v += r.random_range(-4.0..4.0);
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(size, size, data).unwrap()
}

/// High-frequency texture: independent per-pixel noise around mid-gray.
pub fn noise_image(size: usize, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    let normal = Normal::<f64>::new(128.0, 40.0).unwrap();
    let data = (0..size * size)
        .map(|_| normal.sample(&mut r).round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::new(size, size, data).unwrap()
}

/// Leakage probe. 120 samples: 15 weakly informative features (0.7 sd
/// shift), 20 noise features and a `poison` column equal to the label on
/// the test rows of fold 0 and uniform noise on every other row. Returns the
/// table and the fold plan the poison was built against.
pub fn poisoned_table(seed: u64) -> (FeatureTable, osteotex::eval::FoldPlan) {
    let (n_weak, shift) = (15, 0.7);
    let mut r = rng(seed);
    let normal = Normal::<f64>::new(0.0, 1.0).unwrap();
    let n = 120;
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let plan = osteotex::eval::stratified_kfold(&labels, 10, seed).unwrap();
    let test0 = plan.test_rows(0);
    let mut names: Vec<String> = (0..n_weak).map(|j| format!("weak{j:02}")).collect();
    names.extend((0..20).map(|j| format!("noise{j:02}")));
    names.push("poison".into());
    let mut values = Vec::with_capacity(n * names.len());
    for (i, &l) in labels.iter().enumerate() {
        for _ in 0..n_weak {
            values.push(normal.sample(&mut r) + shift * l as f64);
        }
        for _ in 0..20 {
            values.push(normal.sample(&mut r));
        }
        values.push(if test0.contains(&i) {
            l as f64
        } else {
            r.random::<f64>()
        });
    }
    let ids = (0..n).map(|i| format!("s{i:03}")).collect();
    (FeatureTable::new(ids, names, values, Some(labels)).unwrap(), plan)
}

/// Traditional-feature table over `per_class` blob images (label 0) and
/// `per_class` noise images (label 1), `size` x `size` pixels.
pub fn texture_table(per_class: usize, size: usize, seed: u64) -> FeatureTable {
    use osteotex::texture::{extract_traditional, TraditionalConfig};
    use rayon::prelude::*;

    let cfg = TraditionalConfig::default();
    let vectors: Vec<_> = (0..2 * per_class)
        .into_par_iter()
        .map(|i| {
            let img_seed = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            let img = if i % 2 == 0 {
                blob_image(size, img_seed)
            } else {
                noise_image(size, img_seed)
            };
            extract_traditional(&img, &cfg).unwrap()
        })
        .collect();
    let ids = (0..2 * per_class).map(|i| format!("img{i:03}")).collect();
    let labels = (0..2 * per_class).map(|i| (i % 2) as u8).collect();
    FeatureTable::from_vectors(ids, &vectors, Some(labels)).unwrap()
}
