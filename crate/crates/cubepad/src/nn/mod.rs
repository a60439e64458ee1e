//! Forward CNN primitives over cubemaps with pluggable padding, the
//! weakly-supervised saliency head, a ConvLSTM cell, and the four pipeline
//! variants.
//!
//! All layer math is plain f32 with fixed accumulation order, so forward
//! passes are bitwise deterministic. There is no training machinery here:
//! weights are loaded from manifests or generated from a seed.

mod conv;
mod forward;
mod lstm;
mod manifest;

pub use conv::{
    channel_max, conv2d, maxpool, saliency_head, upsample_cubemap, upsample_equirect,
    upsample_stack,
};
pub use forward::{forward_static, forward_temporal, ForwardOptions, PipelineMode};
pub use lstm::{convlstm_step, convlstm_step_cubemap, ConvLstmState, ConvLstmWeights};
pub use manifest::{
    generate_convlstm, generate_network, load_convlstm, load_network, save_convlstm, save_network,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Border handling of convolution/pooling layers on a face stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadMode {
    /// Borrow border texels from the geometrically adjacent cube faces.
    CubePad,
    /// Conventional constant-zero borders.
    ZeroPad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    None,
}

/// Shape-preserving (at stride 1) convolution layer with square odd kernel.
#[derive(Debug, Clone)]
pub struct ConvLayer {
    pub kernel: Tensor,
    pub bias: Tensor,
    pub stride: usize,
    pub pad_mode: PadMode,
    pub activation: Activation,
}

impl ConvLayer {
    pub fn new(
        kernel: Tensor,
        bias: Tensor,
        stride: usize,
        pad_mode: PadMode,
        activation: Activation,
    ) -> Result<Self> {
        let kd = kernel.dims();
        if kd.len() != 4 {
            return Err(Error::Shape(format!(
                "conv kernel needs dims [c_out, c_in, kh, kw], got {kd:?}"
            )));
        }
        let (c_out, kh, kw) = (kd[0], kd[2], kd[3]);
        if kh != kw || kh % 2 == 0 {
            return Err(Error::Shape(format!(
                "conv kernel must be square and odd, got {kh}x{kw}"
            )));
        }
        if bias.dims() != [c_out] {
            return Err(Error::Shape(format!(
                "conv bias must have dims [{c_out}], got {:?}",
                bias.dims()
            )));
        }
        if stride == 0 {
            return Err(Error::Argument("conv stride must be >= 1".into()));
        }
        Ok(ConvLayer {
            kernel,
            bias,
            stride,
            pad_mode,
            activation,
        })
    }

    pub fn out_channels(&self) -> usize {
        self.kernel.dims()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernel.dims()[1]
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel.dims()[2]
    }

    /// Shape-preserving pad width for this kernel at stride 1.
    pub fn pad_width(&self) -> usize {
        (self.kernel_size() - 1) / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolLayer {
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    pub pad_mode: PadMode,
}

impl PoolLayer {
    pub fn new(kernel: usize, stride: usize, pad: usize, pad_mode: PadMode) -> Result<Self> {
        if kernel == 0 || stride == 0 {
            return Err(Error::Argument("pool kernel and stride must be >= 1".into()));
        }
        Ok(PoolLayer {
            kernel,
            stride,
            pad,
            pad_mode,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Conv(ConvLayer),
    MaxPool(PoolLayer),
    Upsample { factor: usize },
}

/// Ordered layer list plus the 1x1 classifier head that turns features into
/// per-class activation maps.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub layers: Vec<Layer>,
    /// Head kernel, dims [classes, c_last, 1, 1].
    pub head: Tensor,
    pub classes: usize,
}

impl NetworkSpec {
    pub fn new(layers: Vec<Layer>, head: Tensor, classes: usize) -> Result<Self> {
        let hd = head.dims();
        if hd.len() != 4 || hd[2] != 1 || hd[3] != 1 {
            return Err(Error::Shape(format!(
                "head needs dims [classes, c, 1, 1], got {hd:?}"
            )));
        }
        if hd[0] != classes {
            return Err(Error::Shape(format!(
                "head has {} rows but classes = {classes}",
                hd[0]
            )));
        }
        let spec = NetworkSpec {
            layers,
            head,
            classes,
        };
        Ok(spec)
    }

    /// Channel count expected of the input.
    pub fn input_channels(&self) -> Result<usize> {
        for layer in &self.layers {
            if let Layer::Conv(c) = layer {
                return Ok(c.in_channels());
            }
        }
        Ok(self.head.dims()[1])
    }

    /// Checks that layer shapes chain and the head matches the last conv.
    pub fn validate(&self, c_in: usize) -> Result<()> {
        let mut c = c_in;
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Conv(conv) => {
                    if conv.in_channels() != c {
                        return Err(Error::Shape(format!(
                            "layer {i}: expects {} input channels, chain carries {c}",
                            conv.in_channels()
                        )));
                    }
                    c = conv.out_channels();
                }
                Layer::MaxPool(_) | Layer::Upsample { .. } => {}
            }
        }
        if self.head.dims()[1] != c {
            return Err(Error::Shape(format!(
                "head expects {} channels, trunk produces {c}",
                self.head.dims()[1]
            )));
        }
        Ok(())
    }

}
