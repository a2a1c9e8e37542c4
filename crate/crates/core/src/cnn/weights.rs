//! Named weight arrays and the `OTWT` binary container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "OTWT"  u32 version  u32 entry_count
//! entry_count x { u16 name_len, name (UTF-8), u8 rank, rank x u32 dim, f32 payload }
//! u32 CRC32 (IEEE) of every byte between the header and the checksum
//! ```
//!
//! Payloads are row-major over the dims. Conv filters use dims
//! `[out_channels, in_channels, kh, kw]`, fully connected layers
//! `[out_dim, in_dim]`, biases `[out]`. A layer `conv1` is stored as
//! `conv1.weight` and (optionally) `conv1.bias`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{LayerSpec, NetworkSpec};
use crate::error::{Error, Result};

pub const OTWT_MAGIC: &[u8; 4] = b"OTWT";
pub const OTWT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightArray {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl WeightArray {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || n != data.len() {
            return Err(Error::Weights(format!(
                "dims {dims:?} need {n} values, got {}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Weights("non-finite weight value".into()));
        }
        Ok(WeightArray { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        WeightArray {
            dims,
            data: vec![0.0; n],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// Conv filters restricted to the first input channel.
    pub fn first_input_slice(&self) -> Result<WeightArray> {
        let &[out_c, in_c, kh, kw] = self.dims.as_slice() else {
            return Err(Error::Weights(format!(
                "expected rank-4 conv weights, got dims {:?}",
                self.dims
            )));
        };
        let per_filter = in_c * kh * kw;
        let mut data = Vec::with_capacity(out_c * kh * kw);
        for f in 0..out_c {
            data.extend_from_slice(&self.data[f * per_filter..][..kh * kw]);
        }
        WeightArray::new(vec![out_c, 1, kh, kw], data)
    }
}

/// Immutable-after-load map from entry name to array.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightStore {
    entries: BTreeMap<String, WeightArray>,
}

impl WeightStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, array: WeightArray) {
        self.entries.insert(name.into(), array);
    }

    pub fn get(&self, name: &str) -> Option<&WeightArray> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut WeightArray> {
        self.entries.get_mut(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &WeightArray)> {
        self.entries.iter()
    }

    /// Filter weights and optional biases of a layer.
    pub fn layer(&self, layer: &str) -> Result<(&WeightArray, Option<&[f32]>)> {
        let w = self
            .get(&format!("{layer}.weight"))
            .ok_or_else(|| Error::Weights(format!("missing weights for layer {layer}")))?;
        let b = self.get(&format!("{layer}.bias")).map(|b| b.data());
        Ok((w, b))
    }

    /// Checks every conv/fc layer of `spec` against the stored shapes.
    pub fn validate(&self, spec: &NetworkSpec) -> Result<()> {
        for (i, layer) in spec.layers.iter().enumerate() {
            let expected = match layer {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                    ..
                } => vec![
                    *out_channels,
                    spec.input_shape_of(i).channels,
                    kernel[0],
                    kernel[1],
                ],
                LayerSpec::Fc { out_dim, .. } => vec![*out_dim, spec.input_shape_of(i).len()],
                _ => continue,
            };
            let name = layer.name();
            let (w, b) = self.layer(name)?;
            if w.dims() != expected.as_slice() {
                return Err(Error::Weights(format!(
                    "layer {name}: weight dims {:?}, spec requires {expected:?}",
                    w.dims()
                )));
            }
            if let Some(b) = b {
                if b.len() != expected[0] {
                    return Err(Error::Weights(format!(
                        "layer {name}: {} biases, spec requires {}",
                        b.len(),
                        expected[0]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Seeded uniform fan-in scaled weights and small biases for every
    /// weighted layer; for shape checks and tests, not for real features.
    pub fn random(spec: &NetworkSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = WeightStore::new();
        for (i, layer) in spec.layers.iter().enumerate() {
            let dims = match layer {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                    ..
                } => vec![
                    *out_channels,
                    spec.input_shape_of(i).channels,
                    kernel[0],
                    kernel[1],
                ],
                LayerSpec::Fc { out_dim, .. } => vec![*out_dim, spec.input_shape_of(i).len()],
                _ => continue,
            };
            let fan_in: usize = dims[1..].iter().product();
            let scale = (6.0 / fan_in as f32).sqrt();
            let n: usize = dims.iter().product();
            let data: Vec<f32> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
            let out = dims[0];
            let bias: Vec<f32> = (0..out).map(|_| rng.random_range(-0.05..0.05)).collect();
            store.insert(format!("{}.weight", layer.name()), WeightArray { dims, data });
            store.insert(
                format!("{}.bias", layer.name()),
                WeightArray {
                    dims: vec![out],
                    data: bias,
                },
            );
        }
        store
    }

    pub fn zero_biases(&mut self) {
        for (name, arr) in self.entries.iter_mut() {
            if name.ends_with(".bias") {
                arr.data.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    pub fn to_otwt_bytes(&self) -> Result<Vec<u8>> {
        let mut body = Vec::new();
        for (name, arr) in &self.entries {
            let name_len = u16::try_from(name.len())
                .map_err(|_| Error::Weights(format!("entry name too long: {name}")))?;
            let rank = u8::try_from(arr.dims.len())
                .map_err(|_| Error::Weights(format!("rank too large for {name}")))?;
            body.extend_from_slice(&name_len.to_le_bytes());
            body.extend_from_slice(name.as_bytes());
            body.push(rank);
            for &d in &arr.dims {
                let d = u32::try_from(d)
                    .map_err(|_| Error::Weights(format!("dimension too large in {name}")))?;
                body.extend_from_slice(&d.to_le_bytes());
            }
            for v in &arr.data {
                body.extend_from_slice(&v.to_le_bytes());
            }
        }
        let count = u32::try_from(self.entries.len())
            .map_err(|_| Error::Weights("too many entries".into()))?;
        let mut out = Vec::with_capacity(body.len() + 16);
        out.extend_from_slice(OTWT_MAGIC);
        out.extend_from_slice(&OTWT_VERSION.to_le_bytes());
        out.extend_from_slice(&count.to_le_bytes());
        out.extend_from_slice(&body);
        out.extend_from_slice(&crc32fast::hash(&body).to_le_bytes());
        Ok(out)
    }

    pub fn from_otwt_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != OTWT_MAGIC {
            return Err(Error::Weights("not an OTWT file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != OTWT_VERSION {
            return Err(Error::Weights(format!(
                "unsupported OTWT version {version}"
            )));
        }
        let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = &bytes[12..bytes.len() - 4];
        let stored_crc = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
        if crc32fast::hash(body) != stored_crc {
            return Err(Error::Weights("OTWT checksum mismatch".into()));
        }

        let mut cur = Cursor { buf: body, pos: 0 };
        let mut store = WeightStore::new();
        for _ in 0..count {
            let name_len = u16::from_le_bytes(cur.take(2)?.try_into().unwrap()) as usize;
            let name = std::str::from_utf8(cur.take(name_len)?)
                .map_err(|_| Error::Weights("entry name is not UTF-8".into()))?
                .to_string();
            let rank = cur.take(1)?[0] as usize;
            let dims = (0..rank)
                .map(|_| Ok(u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize))
                .collect::<Result<Vec<_>>>()?;
            let n: usize = dims.iter().product();
            let payload = cur.take(n * 4)?;
            let data = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if store.get(&name).is_some() {
                return Err(Error::Weights(format!("duplicate entry {name}")));
            }
            store.insert(name, WeightArray::new(dims, data)?);
        }
        if cur.pos != body.len() {
            return Err(Error::Weights(format!(
                "{} trailing bytes after {count} entries",
                body.len() - cur.pos
            )));
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_otwt_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_otwt_bytes()?).map_err(|e| Error::io(path, e))
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Weights("truncated OTWT entry".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}
