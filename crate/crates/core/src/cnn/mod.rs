//! Forward-pass engine for pretrained convolutional networks, used to pull
//! post-ReLU activations of a late fully connected layer as "deep features".
//!
//! Networks are data: a [`NetworkSpec`] (JSON) lists the layers and a
//! [`WeightStore`] (`OTWT` file) holds the arrays. Storage is `f32`. Conv
//! layers accumulate through `matrixmultiply`'s single-threaded sgemm over
//! fixed 16-filter blocks; fc layers use fixed 8-lane dot products. Both are
//! bit-deterministic for a given build regardless of thread count.

pub mod layers;
pub mod spec;
pub mod tensor;
pub mod weights;

pub use layers::{conv_forward, fc_forward, lrn, maxpool, relu, softmax, Padding};
pub use spec::{
    load_network_spec, parse_network_spec, shipped, ChannelMode, LayerSpec, MeanSubtraction,
    NetworkSpec,
};
pub use tensor::{Shape, Tensor3};
pub use weights::{WeightArray, WeightStore};

use crate::error::{Error, Result};
use crate::image::{resize_bicubic, GrayImage};
use crate::texture::FeatureVector;

/// A validated spec paired with matching weights.
#[derive(Clone, Debug)]
pub struct Network {
    spec: NetworkSpec,
    weights: WeightStore,
    /// First conv layer's filters cut to one input channel, for
    /// [`ChannelMode::FirstSliceOnly`].
    first_slice: Option<(usize, WeightArray)>,
}

impl Network {
    pub fn new(spec: NetworkSpec, weights: WeightStore) -> Result<Self> {
        weights.validate(&spec)?;
        let first_slice = match spec.channel_mode {
            ChannelMode::FirstSliceOnly => {
                let idx = spec
                    .layers
                    .iter()
                    .position(|l| matches!(l, LayerSpec::Conv { .. }))
                    .ok_or_else(|| {
                        Error::NetworkSpec("first_slice_only mode needs a conv layer".into())
                    })?;
                let (w, _) = weights.layer(spec.layers[idx].name())?;
                Some((idx, w.first_input_slice()?))
            }
            ChannelMode::Replicate => None,
        };
        Ok(Network {
            spec,
            weights,
            first_slice,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn weights(&self) -> &WeightStore {
        &self.weights
    }

    /// Resizes to the network input, subtracts the mean and lays out the
    /// channels according to the channel mode.
    pub fn prepare_input(&self, img: &GrayImage) -> Result<Tensor3> {
        let Shape {
            height,
            width,
            channels,
        } = self.spec.input;
        let resized = if img.width() == width && img.height() == height {
            img.clone()
        } else {
            resize_bicubic(img, width, height)?
        };
        let channels = match self.spec.channel_mode {
            ChannelMode::FirstSliceOnly => 1,
            ChannelMode::Replicate => channels,
        };
        let mut data = Vec::with_capacity(height * width * channels);
        for c in 0..channels {
            let mean = self.spec.mean_subtraction.for_channel(c);
            data.extend(resized.data().iter().map(|&v| v as f32 - mean));
        }
        Tensor3::new(height, width, channels, data)
    }

    /// Runs layers `0..=last` and returns every intermediate output.
    pub fn forward_trace(&self, input: Tensor3, last: usize) -> Result<Vec<Tensor3>> {
        let mut outs: Vec<Tensor3> = Vec::with_capacity(last + 1);
        let mut x = input;
        for i in 0..=last.min(self.spec.layers.len() - 1) {
            x = self.run_layer(i, &x)?;
            outs.push(x.clone());
        }
        Ok(outs)
    }

    /// Runs the network up to the feature tap and returns the flattened
    /// post-ReLU activation.
    pub fn forward_to_tap(&self, input: Tensor3) -> Result<Vec<f32>> {
        let mut x = input;
        for i in 0..=self.spec.tap_end() {
            x = self.run_layer(i, &x)?;
        }
        Ok(x.into_vec())
    }

    fn run_layer(&self, i: usize, x: &Tensor3) -> Result<Tensor3> {
        let layer = &self.spec.layers[i];
        let out = match layer {
            LayerSpec::Conv {
                name, stride, pad, ..
            } => {
                let (w, b) = self.weights.layer(name)?;
                let w = match &self.first_slice {
                    Some((idx, sliced)) if *idx == i && x.channels() == 1 => sliced,
                    _ => w,
                };
                conv_forward(x, w, b, *stride, *pad)?
            }
            LayerSpec::Relu { .. } => relu(x),
            LayerSpec::Maxpool {
                window,
                stride,
                pad,
                ..
            } => maxpool(x, *window, *stride, *pad)?,
            LayerSpec::Lrn {
                size,
                alpha,
                beta,
                k,
                ..
            } => lrn(x, *size, *alpha, *beta, *k)?,
            LayerSpec::Fc { name, .. } => {
                let (w, b) = self.weights.layer(name)?;
                Tensor3::from_vec(fc_forward(x.data(), w, b)?)
            }
            LayerSpec::Dropout { .. } => x.clone(),
            LayerSpec::Softmax { .. } => {
                let v: Vec<f64> = x.data().iter().map(|&v| v as f64).collect();
                let p = softmax(&v).into_iter().map(|p| p as f32).collect();
                Tensor3::new(x.height(), x.width(), x.channels(), p)?
            }
        };
        if out.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch(format!(
                "layer {} produced non-finite activations",
                layer.name()
            )));
        }
        Ok(out)
    }

    /// Feature names `{layer}_{index:04}` after the weighted layer feeding
    /// the tap (e.g. `fc7_0000`).
    pub fn feature_names(&self) -> Vec<String> {
        let src = self.spec.tap_source_name();
        (0..self.spec.feature_len())
            .map(|i| format!("{src}_{i:04}"))
            .collect()
    }

    /// Deep feature vector of one image, named by [`Network::feature_names`].
    pub fn extract(&self, img: &GrayImage) -> Result<FeatureVector> {
        let act = self.forward_to_tap(self.prepare_input(img)?)?;
        FeatureVector::from_parts(self.feature_names(), act.into_iter().map(f64::from).collect())
    }
}

/// One-shot convenience over [`Network::extract`].
pub fn extract_deep_features(
    img: &GrayImage,
    spec: &NetworkSpec,
    weights: &WeightStore,
) -> Result<FeatureVector> {
    Network::new(spec.clone(), weights.clone())?.extract(img)
}
