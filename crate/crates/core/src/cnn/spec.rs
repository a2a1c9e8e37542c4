//! Declarative network descriptions (JSON) with shape propagation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::layers::{output_len, Padding};
use super::tensor::Shape;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv {
        name: String,
        out_channels: usize,
        kernel: [usize; 2],
        stride: usize,
        #[serde(default)]
        pad: Padding,
    },
    Relu {
        name: String,
    },
    Maxpool {
        name: String,
        window: usize,
        stride: usize,
        #[serde(default)]
        pad: Padding,
    },
    Lrn {
        name: String,
        size: usize,
        alpha: f32,
        beta: f32,
        k: f32,
    },
    Fc {
        name: String,
        out_dim: usize,
    },
    /// Identity at inference time.
    Dropout {
        name: String,
    },
    Softmax {
        name: String,
    },
}

impl LayerSpec {
    pub fn name(&self) -> &str {
        match self {
            LayerSpec::Conv { name, .. }
            | LayerSpec::Relu { name }
            | LayerSpec::Maxpool { name, .. }
            | LayerSpec::Lrn { name, .. }
            | LayerSpec::Fc { name, .. }
            | LayerSpec::Dropout { name }
            | LayerSpec::Softmax { name } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv { .. } => "conv",
            LayerSpec::Relu { .. } => "relu",
            LayerSpec::Maxpool { .. } => "maxpool",
            LayerSpec::Lrn { .. } => "lrn",
            LayerSpec::Fc { .. } => "fc",
            LayerSpec::Dropout { .. } => "dropout",
            LayerSpec::Softmax { .. } => "softmax",
        }
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, LayerSpec::Conv { .. } | LayerSpec::Fc { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// Feed the gray image as a single channel and use only the first
    /// input-channel slice of the first conv layer's filters.
    FirstSliceOnly,
    /// Copy the gray image into every input channel.
    Replicate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeanSubtraction {
    Scalar(f32),
    PerChannel(Vec<f32>),
}

impl MeanSubtraction {
    pub fn for_channel(&self, c: usize) -> f32 {
        match self {
            MeanSubtraction::Scalar(m) => *m,
            MeanSubtraction::PerChannel(v) => v[c],
        }
    }
}

impl Default for MeanSubtraction {
    fn default() -> Self {
        MeanSubtraction::Scalar(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub input: Shape,
    #[serde(default)]
    pub mean_subtraction: MeanSubtraction,
    pub channel_mode: ChannelMode,
    pub layers: Vec<LayerSpec>,
    /// Index of the layer whose post-activation output is the feature: a
    /// relu layer, or an fc layer immediately followed by one.
    pub feature_tap: usize,
    #[serde(skip)]
    shapes: Vec<Shape>,
}

/// The three shipped architecture files.
pub mod shipped {
    pub const VGG_F: &str = include_str!("../../specs/vgg-f.json");
    pub const VGG_M: &str = include_str!("../../specs/vgg-m.json");
    pub const VGG_S: &str = include_str!("../../specs/vgg-s.json");

    pub fn by_name(name: &str) -> Option<&'static str> {
        match name {
            "vgg-f" => Some(VGG_F),
            "vgg-m" => Some(VGG_M),
            "vgg-s" => Some(VGG_S),
            _ => None,
        }
    }
}

pub fn parse_network_spec(text: &str) -> Result<NetworkSpec> {
    let mut spec: NetworkSpec = serde_json::from_str(text).map_err(|e| {
        Error::NetworkSpec(format!("cannot parse network spec: {e}"))
    })?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_network_spec(path: impl AsRef<std::path::Path>) -> Result<NetworkSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network_spec(&text)
}

impl NetworkSpec {
    /// Structural checks plus shape propagation; fills the per-layer shape
    /// trace.
    pub fn validate(&mut self) -> Result<()> {
        let bad = |msg: String| Err(Error::NetworkSpec(format!("{}: {msg}", self.name)));
        if self.input.is_empty() {
            return bad(format!("empty input shape {}", self.input));
        }
        if let MeanSubtraction::PerChannel(v) = &self.mean_subtraction {
            if v.len() != self.input.channels {
                return bad(format!(
                    "{} mean values for {} input channels",
                    v.len(),
                    self.input.channels
                ));
            }
        }
        if self.layers.is_empty() {
            return bad("no layers".into());
        }
        let mut names = HashSet::new();
        for l in &self.layers {
            if !names.insert(l.name()) {
                return bad(format!("duplicate layer name {}", l.name()));
            }
        }
        if self.feature_tap >= self.layers.len() {
            return bad(format!(
                "feature_tap {} out of range for {} layers",
                self.feature_tap,
                self.layers.len()
            ));
        }
        match &self.layers[self.feature_tap] {
            LayerSpec::Relu { .. } => {}
            LayerSpec::Fc { .. }
                if matches!(
                    self.layers.get(self.feature_tap + 1),
                    Some(LayerSpec::Relu { .. })
                ) => {}
            other => {
                return bad(format!(
                    "feature_tap must be a relu layer or an fc layer followed by relu, got {} ({})",
                    other.name(),
                    other.kind()
                ))
            }
        }

        let mut shape = self.input;
        let mut shapes = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            shape = match l {
                LayerSpec::Conv {
                    name,
                    out_channels,
                    kernel,
                    stride,
                    pad,
                } => {
                    if *out_channels == 0 {
                        return bad(format!("{name}: zero output channels"));
                    }
                    let h = output_len(shape.height, pad.top + pad.bottom, kernel[0], *stride);
                    let w = output_len(shape.width, pad.left + pad.right, kernel[1], *stride);
                    match (h, w) {
                        (Some(height), Some(width)) => Shape {
                            height,
                            width,
                            channels: *out_channels,
                        },
                        _ => {
                            return bad(format!(
                                "{name}: {}x{} kernel (stride {stride}) does not fit padded {shape} input",
                                kernel[0], kernel[1]
                            ))
                        }
                    }
                }
                LayerSpec::Maxpool {
                    name,
                    window,
                    stride,
                    pad,
                } => {
                    let h = output_len(shape.height, pad.top + pad.bottom, *window, *stride);
                    let w = output_len(shape.width, pad.left + pad.right, *window, *stride);
                    match (h, w) {
                        (Some(height), Some(width)) => Shape {
                            height,
                            width,
                            channels: shape.channels,
                        },
                        _ => {
                            return bad(format!(
                                "{name}: {window}x{window} pool (stride {stride}) does not fit padded {shape} input"
                            ))
                        }
                    }
                }
                LayerSpec::Lrn { name, size, .. } => {
                    if size % 2 == 0 {
                        return bad(format!("{name}: LRN size must be odd"));
                    }
                    shape
                }
                LayerSpec::Fc { name, out_dim } => {
                    if *out_dim == 0 {
                        return bad(format!("{name}: zero output dimension"));
                    }
                    Shape {
                        height: 1,
                        width: 1,
                        channels: *out_dim,
                    }
                }
                LayerSpec::Relu { .. } | LayerSpec::Dropout { .. } | LayerSpec::Softmax { .. } => {
                    shape
                }
            };
            shapes.push(shape);
        }
        self.shapes = shapes;
        Ok(())
    }

    /// Output shape of every layer, in order.
    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn input_shape_of(&self, layer: usize) -> Shape {
        if layer == 0 {
            self.input
        } else {
            self.shapes[layer - 1]
        }
    }

    /// Index of the last layer that must run to produce the feature (the
    /// relu itself).
    pub fn tap_end(&self) -> usize {
        match self.layers[self.feature_tap] {
            LayerSpec::Fc { .. } => self.feature_tap + 1,
            _ => self.feature_tap,
        }
    }

    pub fn feature_len(&self) -> usize {
        self.shapes[self.tap_end()].len()
    }

    /// Name of the weighted layer that feeds the tap, used to name features.
    pub fn tap_source_name(&self) -> &str {
        self.layers[..=self.tap_end()]
            .iter()
            .rev()
            .find(|l| l.is_weighted())
            .map(LayerSpec::name)
            .unwrap_or_else(|| self.layers[self.tap_end()].name())
    }

    /// Spatial size after each conv and pool layer, in order.
    pub fn spatial_trace(&self) -> Vec<usize> {
        self.layers
            .iter()
            .zip(&self.shapes)
            .filter(|(l, _)| matches!(l, LayerSpec::Conv { .. } | LayerSpec::Maxpool { .. }))
            .map(|(_, s)| s.height)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vgg_f_trace() {
        let spec = parse_network_spec(shipped::VGG_F).unwrap();
        assert_eq!(spec.spatial_trace(), vec![54, 27, 27, 13, 13, 13, 13, 6]);
        assert_eq!(spec.feature_len(), 4096);
        assert_eq!(spec.tap_source_name(), "fc7");
        let weighted: Vec<&str> = spec
            .layers
            .iter()
            .filter(|l| l.is_weighted())
            .map(LayerSpec::kind)
            .collect();
        assert_eq!(weighted, ["conv", "conv", "conv", "conv", "conv", "fc", "fc", "fc"]);
    }

    #[test]
    fn vgg_m_conv1() {
        let spec = parse_network_spec(shipped::VGG_M).unwrap();
        match &spec.layers[0] {
            LayerSpec::Conv {
                out_channels,
                kernel,
                stride,
                pad,
                ..
            } => {
                assert_eq!(*out_channels, 96);
                assert_eq!(*kernel, [7, 7]);
                assert_eq!(*stride, 2);
                assert_eq!(*pad, Padding::uniform(0));
            }
            other => panic!("unexpected first layer {other:?}"),
        }
        assert_eq!(spec.feature_len(), 4096);
    }

    #[test]
    fn vgg_s_terminates_in_4096() {
        let spec = parse_network_spec(shipped::VGG_S).unwrap();
        assert_eq!(spec.feature_len(), 4096);
        assert_eq!(*spec.spatial_trace().last().unwrap(), 6);
    }

    fn tiny(kernel: usize, tap: usize, extra: &str) -> String {
        format!(
            r#"{{"name":"t","input":{{"height":4,"width":4,"channels":1}},
            "channel_mode":"replicate","feature_tap":{tap},
            "layers":[{{"kind":"conv","name":"c1","out_channels":2,"kernel":[{kernel},{kernel}],"stride":1}},
                      {{"kind":"relu","name":"r1"}},
                      {{"kind":"fc","name":"f1","out_dim":3}}{extra}]}}"#
        )
    }

    #[test]
    fn oversized_kernel_is_shape_error() {
        let err = parse_network_spec(&tiny(5, 1, "")).unwrap_err();
        assert!(err.to_string().contains("does not fit"), "{err}");
    }

    #[test]
    fn tap_rules() {
        assert!(parse_network_spec(&tiny(2, 1, "")).is_ok());
        // fc without a following relu
        assert!(parse_network_spec(&tiny(2, 2, "")).is_err());
        let ok = parse_network_spec(&tiny(2, 2, r#",{"kind":"relu","name":"r2"}"#)).unwrap();
        assert_eq!(ok.tap_end(), 3);
        assert_eq!(ok.feature_len(), 3);
        assert!(parse_network_spec(&tiny(2, 9, "")).is_err());
    }

    #[test]
    fn unknown_kind_rejected() {
        let text = tiny(2, 1, "").replace("\"relu\"", "\"gelu\"");
        assert!(parse_network_spec(&text).is_err());
    }
}
