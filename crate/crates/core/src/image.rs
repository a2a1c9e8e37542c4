//! Grayscale images: PGM I/O, bicubic resampling and gray-level quantization.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// An 8-bit grayscale image stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidDimensions(format!(
                "{width}x{height} image needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// An image whose pixels are gray-level bin indices in `0..levels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    data: Vec<u16>,
}

impl QuantizedImage {
    pub fn new(width: usize, height: usize, levels: usize, data: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        if !(2..=256).contains(&levels) {
            return Err(Error::InvalidArgument(format!(
                "levels must be in 2..=256, got {levels}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidDimensions(format!(
                "{width}x{height} image needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|&&v| v as usize >= levels) {
            return Err(Error::InvalidArgument(format!(
                "bin {v} out of range for {levels} levels"
            )));
        }
        Ok(QuantizedImage {
            width,
            height,
            levels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> usize {
        self.data[y * self.width + x] as usize
    }
}

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes)
}

/// Writes the binary (P5) encoding.
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm_binary(img)).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm_binary(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn encode_pgm_ascii(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n255\n", img.width, img.height);
    for row in img.data.chunks(img.width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                Error::MalformedHeader(format!(
                    "{what} is not a number: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Parses an ASCII (P2) or binary (P5) PGM with maxval at most 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut rd = HeaderReader { bytes, pos: 0 };
    let binary = match rd.token() {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some(other) => {
            return Err(Error::MalformedHeader(format!(
                "bad magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
        None => return Err(Error::MalformedHeader("empty file".into())),
    };
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    let maxval = rd.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedDepth(maxval));
    }
    if maxval == 0 {
        return Err(Error::MalformedHeader("maxval 0".into()));
    }
    let expected = width * height;

    let data = if binary {
        // exactly one whitespace byte separates maxval from the raster
        match bytes.get(rd.pos) {
            Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
            _ => {
                return Err(Error::TruncatedPayload { expected, found: 0 });
            }
        }
        let raster = &bytes[rd.pos..];
        if raster.len() < expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: raster.len(),
            });
        }
        raster[..expected].to_vec()
    } else {
        let mut data = Vec::with_capacity(expected);
        while data.len() < expected {
            match rd.token() {
                Some(tok) => {
                    let v = std::str::from_utf8(tok)
                        .ok()
                        .and_then(|s| s.parse::<u32>().ok())
                        .ok_or_else(|| {
                            Error::MalformedHeader(format!(
                                "bad sample {:?}",
                                String::from_utf8_lossy(tok)
                            ))
                        })?;
                    if v > maxval {
                        return Err(Error::MalformedHeader(format!(
                            "sample {v} exceeds maxval {maxval}"
                        )));
                    }
                    data.push(v as u8);
                }
                None => {
                    return Err(Error::TruncatedPayload {
                        expected,
                        found: data.len(),
                    })
                }
            }
        }
        data
    };
    GrayImage::new(width, height, data)
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

const CUBIC_A: f64 = -0.5;

/// Catmull-Rom cubic convolution kernel (a = -0.5).
pub fn cubic_kernel(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        ((CUBIC_A + 2.0) * x - (CUBIC_A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((CUBIC_A * x - 5.0 * CUBIC_A) * x + 8.0 * CUBIC_A) * x - 4.0 * CUBIC_A
    } else {
        0.0
    }
}

/// Four clamped source taps and their weights for every output coordinate.
fn axis_taps(in_len: usize, out_len: usize) -> Vec<([usize; 4], [f64; 4])> {
    let scale = in_len as f64 / out_len as f64;
    let last = in_len as isize - 1;
    (0..out_len)
        .map(|o| {
            let src = (o as f64 + 0.5) * scale - 0.5;
            let base = src.floor();
            let t = src - base;
            let base = base as isize;
            let mut idx = [0usize; 4];
            let mut w = [0f64; 4];
            for k in 0..4 {
                idx[k] = (base - 1 + k as isize).clamp(0, last) as usize;
                w[k] = cubic_kernel(t - (k as f64 - 1.0));
            }
            (idx, w)
        })
        .collect()
}

/// Resizes with separable Catmull-Rom bicubic interpolation, pixel-center
/// aligned, clamp-to-edge borders. Results are rounded and clamped to 0..=255.
pub fn resize_bicubic(img: &GrayImage, out_w: usize, out_h: usize) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidDimensions(format!(
            "zero target dimension {out_w}x{out_h}"
        )));
    }
    let xt = axis_taps(img.width, out_w);
    let yt = axis_taps(img.height, out_h);

    // horizontal pass keeps full precision
    let mut rows = vec![0f64; img.height * out_w];
    for y in 0..img.height {
        let src = &img.data[y * img.width..(y + 1) * img.width];
        let dst = &mut rows[y * out_w..(y + 1) * out_w];
        for (d, (idx, w)) in dst.iter_mut().zip(&xt) {
            *d = (0..4).map(|k| w[k] * src[idx[k]] as f64).sum();
        }
    }

    let mut out = Vec::with_capacity(out_w * out_h);
    for (idx, w) in &yt {
        for x in 0..out_w {
            let v: f64 = (0..4).map(|k| w[k] * rows[idx[k] * out_w + x]).sum();
            out.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(out_w, out_h, out)
}

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

/// Uniform-width binning of 0..=255 into `levels` bins:
/// `bin = floor(v * levels / 256)`.
pub fn quantize(img: &GrayImage, levels: usize) -> Result<QuantizedImage> {
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidArgument(format!(
            "levels must be in 2..=256, got {levels}"
        )));
    }
    let data = img
        .data
        .iter()
        .map(|&v| (v as usize * levels / 256) as u16)
        .collect();
    QuantizedImage::new(img.width, img.height, levels, data)
}
