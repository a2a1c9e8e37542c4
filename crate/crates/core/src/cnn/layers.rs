//! Single-layer forward operations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor3;
use super::weights::WeightArray;
use crate::error::{Error, Result};

/// Zero padding (`-inf` for pooling) added on each side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "PaddingRepr", into = "PaddingRepr")]
pub struct Padding {
    pub top: usize,
    pub bottom: usize,
    pub left: usize,
    pub right: usize,
}

impl Padding {
    pub fn uniform(p: usize) -> Self {
        Padding {
            top: p,
            bottom: p,
            left: p,
            right: p,
        }
    }
}

/// A single number, or `[top, bottom, left, right]`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PaddingRepr {
    Uniform(usize),
    Sides([usize; 4]),
}

impl From<PaddingRepr> for Padding {
    fn from(r: PaddingRepr) -> Self {
        match r {
            PaddingRepr::Uniform(p) => Padding::uniform(p),
            PaddingRepr::Sides([top, bottom, left, right]) => Padding {
                top,
                bottom,
                left,
                right,
            },
        }
    }
}

impl From<Padding> for PaddingRepr {
    fn from(p: Padding) -> Self {
        if p.top == p.bottom && p.top == p.left && p.top == p.right {
            PaddingRepr::Uniform(p.top)
        } else {
            PaddingRepr::Sides([p.top, p.bottom, p.left, p.right])
        }
    }
}

/// `floor((input + pad - window) / stride) + 1`, or `None` when the window
/// does not fit.
pub fn output_len(input: usize, pad: usize, window: usize, stride: usize) -> Option<usize> {
    let padded = input + pad;
    if stride == 0 || window == 0 || window > padded {
        return None;
    }
    Some((padded - window) / stride + 1)
}

fn output_dims(
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    pad: Padding,
) -> Result<(usize, usize)> {
    let oh = output_len(h, pad.top + pad.bottom, kh, stride);
    let ow = output_len(w, pad.left + pad.right, kw, stride);
    match (oh, ow) {
        (Some(oh), Some(ow)) => Ok((oh, ow)),
        _ => Err(Error::ShapeMismatch(format!(
            "{kh}x{kw} window with stride {stride} does not fit {h}x{w} input padded by {pad:?}"
        ))),
    }
}

/// Output channels handled per parallel task; fixed so the result does not
/// depend on the thread count.
const CONV_CHANNEL_BLOCK: usize = 16;

/// Cross-correlation plus bias. `weights` has dims
/// `[out_channels, in_channels, kh, kw]`.
///
/// The input is unrolled into a `(in_channels*kh*kw) x (oh*ow)` patch matrix
/// and multiplied by the filter matrix, so every output is a dot product
/// over (channel, kernel row, kernel column) in that order.
pub fn conv_forward(
    x: &Tensor3,
    weights: &WeightArray,
    biases: Option<&[f32]>,
    stride: usize,
    pad: Padding,
) -> Result<Tensor3> {
    let &[out_c, in_c, kh, kw] = weights.dims() else {
        return Err(Error::ShapeMismatch(format!(
            "conv weights must have rank 4, got dims {:?}",
            weights.dims()
        )));
    };
    if in_c != x.channels() {
        return Err(Error::ShapeMismatch(format!(
            "conv weights expect {in_c} input channels, input has {}",
            x.channels()
        )));
    }
    if let Some(b) = biases {
        if b.len() != out_c {
            return Err(Error::ShapeMismatch(format!(
                "{} biases for {out_c} filters",
                b.len()
            )));
        }
    }
    let (h, w) = (x.height(), x.width());
    let (oh, ow) = output_dims(h, w, kh, kw, stride, pad)?;
    let k = in_c * kh * kw;
    let n = oh * ow;

    let mut cols = vec![0f32; k * n];
    for c in 0..in_c {
        let plane = x.plane(c);
        for ky in 0..kh {
            for kx in 0..kw {
                let row = &mut cols[((c * kh + ky) * kw + kx) * n..][..n];
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad.top as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let src = &plane[iy as usize * w..][..w];
                    let dst = &mut row[oy * ow..][..ow];
                    for (ox, d) in dst.iter_mut().enumerate() {
                        let ix = (ox * stride + kx) as isize - pad.left as isize;
                        if ix >= 0 && ix < w as isize {
                            *d = src[ix as usize];
                        }
                    }
                }
            }
        }
    }

    let mut out = vec![0f32; out_c * n];
    let filters = weights.data();
    out.par_chunks_mut(CONV_CHANNEL_BLOCK * n)
        .enumerate()
        .for_each(|(blk, dst)| {
            let rows = dst.len() / n;
            let a = &filters[blk * CONV_CHANNEL_BLOCK * k..][..rows * k];
            // SAFETY: a is rows x k, cols is k x n, dst is rows x n, all
            // row-major with unit column stride and in bounds.
            unsafe {
                matrixmultiply::sgemm(
                    rows,
                    k,
                    n,
                    1.0,
                    a.as_ptr(),
                    k as isize,
                    1,
                    cols.as_ptr(),
                    n as isize,
                    1,
                    0.0,
                    dst.as_mut_ptr(),
                    n as isize,
                    1,
                );
            }
            if let Some(b) = biases {
                for (r, plane) in dst.chunks_mut(n).enumerate() {
                    let bias = b[blk * CONV_CHANNEL_BLOCK + r];
                    plane.iter_mut().for_each(|v| *v += bias);
                }
            }
        });
    Tensor3::new(oh, ow, out_c, out)
}

pub fn relu(x: &Tensor3) -> Tensor3 {
    let mut y = x.clone();
    relu_in_place(&mut y);
    y
}

pub fn relu_in_place(x: &mut Tensor3) {
    x.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Per-channel windowed maximum; padded cells never win.
pub fn maxpool(x: &Tensor3, window: usize, stride: usize, pad: Padding) -> Result<Tensor3> {
    if window == 0 || stride == 0 {
        return Err(Error::InvalidArgument(format!(
            "degenerate pooling window {window} / stride {stride}"
        )));
    }
    let (h, w) = (x.height(), x.width());
    let (oh, ow) = output_dims(h, w, window, window, stride, pad)?;
    let mut out = Tensor3::zeros(oh, ow, x.channels());
    for c in 0..x.channels() {
        let plane = x.plane(c);
        for oy in 0..oh {
            let y0 = (oy * stride) as isize - pad.top as isize;
            let ys = y0.max(0) as usize..((y0 + window as isize).min(h as isize)).max(0) as usize;
            for ox in 0..ow {
                let x0 = (ox * stride) as isize - pad.left as isize;
                let xs =
                    x0.max(0) as usize..((x0 + window as isize).min(w as isize)).max(0) as usize;
                let mut m = f32::NEG_INFINITY;
                for yy in ys.clone() {
                    for xx in xs.clone() {
                        m = m.max(plane[yy * w + xx]);
                    }
                }
                if m == f32::NEG_INFINITY {
                    return Err(Error::ShapeMismatch(format!(
                        "pooling window at ({oy}, {ox}) lies entirely in padding"
                    )));
                }
                out.set(oy, ox, c, m);
            }
        }
    }
    Ok(out)
}

/// Cross-channel local response normalization:
/// `v / (k + alpha * sum(v_j^2))^beta`, the sum running over the `size`
/// channels centered on the current one (truncated at the ends).
pub fn lrn(x: &Tensor3, size: usize, alpha: f32, beta: f32, k: f32) -> Result<Tensor3> {
    if size == 0 || size % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "LRN size must be odd, got {size}"
        )));
    }
    let half = size / 2;
    let cn = x.channels();
    let hw = x.height() * x.width();
    let mut out = x.clone();
    let src = x.data();
    let dst = out.data_mut();
    for c in 0..cn {
        let lo = c.saturating_sub(half);
        let hi = (c + half).min(cn - 1);
        for p in 0..hw {
            let mut s = 0f32;
            for j in lo..=hi {
                let v = src[j * hw + p];
                s += v * v;
            }
            dst[c * hw + p] = src[c * hw + p] / (k + alpha * s).powf(beta);
        }
    }
    Ok(out)
}

/// Lanes used by the fully connected dot products; the lane sums are added
/// in ascending lane order at the end.
const FC_LANES: usize = 8;

fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; FC_LANES];
    let mut ac = a.chunks_exact(FC_LANES);
    let mut bc = b.chunks_exact(FC_LANES);
    for (x, y) in (&mut ac).zip(&mut bc) {
        for l in 0..FC_LANES {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0f32;
    for (x, y) in ac.remainder().iter().zip(bc.remainder()) {
        tail += x * y;
    }
    acc.iter().sum::<f32>() + tail
}

/// Matrix-vector product plus bias. `weights` has dims `[out_dim, in_dim]`
/// and `x` is the flattened (channel-planar) input.
pub fn fc_forward(x: &[f32], weights: &WeightArray, biases: Option<&[f32]>) -> Result<Vec<f32>> {
    let &[out_dim, in_dim] = weights.dims() else {
        return Err(Error::ShapeMismatch(format!(
            "fc weights must have rank 2, got dims {:?}",
            weights.dims()
        )));
    };
    if x.len() != in_dim {
        return Err(Error::ShapeMismatch(format!(
            "fc layer expects {in_dim} inputs, got {}",
            x.len()
        )));
    }
    if let Some(b) = biases {
        if b.len() != out_dim {
            return Err(Error::ShapeMismatch(format!(
                "{} biases for {out_dim} outputs",
                b.len()
            )));
        }
    }
    let w = weights.data();
    Ok((0..out_dim)
        .into_par_iter()
        .map(|o| dot(&w[o * in_dim..(o + 1) * in_dim], x) + biases.map_or(0.0, |b| b[o]))
        .collect())
}

/// Max-shifted softmax.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
