//! Convolutional LSTM cell with per-channel peephole connections.
//!
//! Gates are 3x3 convolutions over the input and hidden stacks; peepholes
//! multiply the cell state by a per-channel scalar. The padding mode of the
//! gate convolutions is pluggable, so the cell runs cube-padded on face
//! stacks or zero-padded on flat maps.

use crate::error::{Error, Result};
use crate::tensor::{CubeMap, Tensor};

use super::conv::{conv_stack, stack_dims};
use super::{Activation, ConvLayer, PadMode};

/// The full parameter set of one cell: input/hidden kernels for the input,
/// forget, candidate and output gates, peephole vectors, and biases.
#[derive(Debug, Clone)]
pub struct ConvLstmWeights {
    pub w_xi: Tensor,
    pub w_xf: Tensor,
    pub w_xc: Tensor,
    pub w_xo: Tensor,
    pub w_hi: Tensor,
    pub w_hf: Tensor,
    pub w_hc: Tensor,
    pub w_ho: Tensor,
    pub w_ci: Tensor,
    pub w_cf: Tensor,
    pub w_co: Tensor,
    pub b_i: Tensor,
    pub b_f: Tensor,
    pub b_c: Tensor,
    pub b_o: Tensor,
}

impl ConvLstmWeights {
    pub fn new(
        kernels: [Tensor; 8],
        peepholes: [Tensor; 3],
        biases: [Tensor; 4],
    ) -> Result<Self> {
        let k = kernels[0].dims().first().copied().unwrap_or(0);
        for t in &kernels {
            if t.dims() != [k, k, 3, 3] {
                return Err(Error::Shape(format!(
                    "lstm kernels must all be [{k}, {k}, 3, 3], got {:?}",
                    t.dims()
                )));
            }
        }
        for t in peepholes.iter().chain(&biases) {
            if t.dims() != [k] {
                return Err(Error::Shape(format!(
                    "lstm vectors must be [{k}], got {:?}",
                    t.dims()
                )));
            }
        }
        let [w_xi, w_xf, w_xc, w_xo, w_hi, w_hf, w_hc, w_ho] = kernels;
        let [w_ci, w_cf, w_co] = peepholes;
        let [b_i, b_f, b_c, b_o] = biases;
        Ok(ConvLstmWeights {
            w_xi,
            w_xf,
            w_xc,
            w_xo,
            w_hi,
            w_hf,
            w_hc,
            w_ho,
            w_ci,
            w_cf,
            w_co,
            b_i,
            b_f,
            b_c,
            b_o,
        })
    }

    pub fn zeros(channels: usize) -> Self {
        let kern = || Tensor::zeros(&[channels, channels, 3, 3]);
        let vec = || Tensor::zeros(&[channels]);
        ConvLstmWeights::new(
            [kern(), kern(), kern(), kern(), kern(), kern(), kern(), kern()],
            [vec(), vec(), vec()],
            [vec(), vec(), vec(), vec()],
        )
        .expect("zero weights are consistent")
    }

    pub fn channels(&self) -> usize {
        self.w_xi.dims()[0]
    }
}

/// Hidden/cell pair. For the cubemap pipeline both stacks are `[6, K, w, w]`;
/// the flat baseline keeps `[1, K, h, w]`.
#[derive(Debug, Clone)]
pub struct ConvLstmState {
    hidden: Tensor,
    cell: Tensor,
}

impl ConvLstmState {
    pub fn zeros(n: usize, channels: usize, h: usize, w: usize) -> Self {
        ConvLstmState {
            hidden: Tensor::zeros(&[n, channels, h, w]),
            cell: Tensor::zeros(&[n, channels, h, w]),
        }
    }

    pub fn zeros_like(input: &Tensor) -> Result<Self> {
        let (n, c, h, w) = stack_dims(input)?;
        Ok(ConvLstmState::zeros(n, c, h, w))
    }

    pub fn from_parts(hidden: Tensor, cell: Tensor) -> Result<Self> {
        stack_dims(&hidden)?;
        if hidden.dims() != cell.dims() {
            return Err(Error::Shape(format!(
                "hidden dims {:?} differ from cell dims {:?}",
                hidden.dims(),
                cell.dims()
            )));
        }
        Ok(ConvLstmState { hidden, cell })
    }

    pub fn hidden(&self) -> &Tensor {
        &self.hidden
    }

    pub fn cell(&self) -> &Tensor {
        &self.cell
    }

    /// Hidden stack viewed as a cubemap (cube pipeline only).
    pub fn hidden_cubemap(&self) -> Result<CubeMap> {
        CubeMap::new(self.hidden.clone())
    }
}

#[inline]
fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

fn gate_conv(x: &Tensor, kernel: &Tensor, mode: PadMode) -> Result<Tensor> {
    let k = kernel.dims()[0];
    let layer = ConvLayer::new(
        kernel.clone(),
        Tensor::zeros(&[k]),
        1,
        mode,
        Activation::None,
    )?;
    conv_stack(x, &layer, mode)
}

/// One ConvLSTM step:
///
/// i = sigma(W_xi*X + W_hi*H + W_ci o C + b_i)
/// f = sigma(W_xf*X + W_hf*H + W_cf o C + b_f)
/// g = tanh(W_xc*X + W_hc*H + b_c)
/// C' = i o g + f o C
/// o = sigma(W_xo*X + W_ho*H + W_co o C' + b_o)
/// H' = o o tanh(C')
pub fn convlstm_step(
    state: &ConvLstmState,
    input: &Tensor,
    weights: &ConvLstmWeights,
    mode: PadMode,
) -> Result<ConvLstmState> {
    let (n, c, h, w) = stack_dims(input)?;
    if c != weights.channels() {
        return Err(Error::Shape(format!(
            "input has {c} channels, weights expect {}",
            weights.channels()
        )));
    }
    if state.hidden.dims() != input.dims() || state.cell.dims() != input.dims() {
        return Err(Error::Shape(format!(
            "state dims {:?} do not match input dims {:?}",
            state.hidden.dims(),
            input.dims()
        )));
    }

    let xi = gate_conv(input, &weights.w_xi, mode)?;
    let hi = gate_conv(&state.hidden, &weights.w_hi, mode)?;
    let xf = gate_conv(input, &weights.w_xf, mode)?;
    let hf = gate_conv(&state.hidden, &weights.w_hf, mode)?;
    let xc = gate_conv(input, &weights.w_xc, mode)?;
    let hc = gate_conv(&state.hidden, &weights.w_hc, mode)?;
    let xo = gate_conv(input, &weights.w_xo, mode)?;
    let ho = gate_conv(&state.hidden, &weights.w_ho, mode)?;

    let mut new_cell = Tensor::zeros(&[n, c, h, w]);
    let mut new_hidden = Tensor::zeros(&[n, c, h, w]);
    let plane = h * w;
    for img in 0..n {
        for ch in 0..c {
            let base = (img * c + ch) * plane;
            let p_ci = weights.w_ci.data()[ch];
            let p_cf = weights.w_cf.data()[ch];
            let p_co = weights.w_co.data()[ch];
            let bi = weights.b_i.data()[ch];
            let bf = weights.b_f.data()[ch];
            let bc = weights.b_c.data()[ch];
            let bo = weights.b_o.data()[ch];
            for idx in base..base + plane {
                let c_prev = state.cell.data()[idx];
                let i = sigmoid(xi.data()[idx] + hi.data()[idx] + p_ci * c_prev + bi);
                let f = sigmoid(xf.data()[idx] + hf.data()[idx] + p_cf * c_prev + bf);
                let g = (xc.data()[idx] + hc.data()[idx] + bc).tanh();
                let c_new = i * g + f * c_prev;
                let o = sigmoid(xo.data()[idx] + ho.data()[idx] + p_co * c_new + bo);
                new_cell.data_mut()[idx] = c_new;
                new_hidden.data_mut()[idx] = o * c_new.tanh();
            }
        }
    }
    Ok(ConvLstmState {
        hidden: new_hidden,
        cell: new_cell,
    })
}

/// Cubemap-typed step for the cube pipeline.
pub fn convlstm_step_cubemap(
    state: &ConvLstmState,
    input: &CubeMap,
    weights: &ConvLstmWeights,
    mode: PadMode,
) -> Result<ConvLstmState> {
    convlstm_step(state, input.tensor(), weights, mode)
}
