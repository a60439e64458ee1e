//! Self-supervised temporal losses over consecutive saliency maps: flow-
//! warped reconstruction, smoothness, motion masking, the weighted total,
//! and the analytic gradient with respect to the current map.
//!
//! All reductions accumulate in f64 in a fixed order, so losses are
//! reproducible bitwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{sample_plane_wrap, EquirectMap, Tensor};

/// Per-pixel displacement field (dx, dy) in pixels per frame, dims
/// `[2, q, p]`.
#[derive(Debug, Clone)]
pub struct FlowField {
    tensor: Tensor,
}

impl FlowField {
    pub fn new(tensor: Tensor) -> Result<Self> {
        let d = tensor.dims();
        if d.len() != 3 || d[0] != 2 {
            return Err(Error::Shape(format!(
                "flow field needs dims [2, q, p], got {d:?}"
            )));
        }
        if !tensor.is_finite() {
            return Err(Error::Data("flow field contains non-finite values".into()));
        }
        Ok(FlowField { tensor })
    }

    pub fn zeros(q: usize, p: usize) -> Self {
        FlowField {
            tensor: Tensor::zeros(&[2, q, p]),
        }
    }

    pub fn height(&self) -> usize {
        self.tensor.dims()[1]
    }

    pub fn width(&self) -> usize {
        self.tensor.dims()[2]
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn dx(&self) -> &[f32] {
        let n = self.height() * self.width();
        &self.tensor.data()[..n]
    }

    pub fn dy(&self) -> &[f32] {
        let n = self.height() * self.width();
        &self.tensor.data()[n..]
    }

    /// Flow magnitude at a pixel.
    pub fn magnitude(&self, idx: usize) -> f32 {
        let dx = self.dx()[idx];
        let dy = self.dy()[idx];
        (dx * dx + dy * dy).sqrt()
    }
}

/// Loss weights and sequencing parameters. Defaults: lambda_r = 0.1,
/// lambda_s = 0.7, lambda_m = 0.001, sequence length 5, and a motion
/// margin of half a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_r: f64,
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub epsilon: f64,
    pub z: usize,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_r: 0.1,
            lambda_s: 0.7,
            lambda_m: 0.001,
            epsilon: 0.5,
            z: 5,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_r < 0.0 || self.lambda_s < 0.0 || self.lambda_m < 0.0 {
            return Err(Error::Argument("loss weights must be nonnegative".into()));
        }
        if self.epsilon < 0.0 {
            return Err(Error::Argument("motion margin must be nonnegative".into()));
        }
        if self.z == 0 {
            return Err(Error::Argument("sequence length z must be >= 1".into()));
        }
        Ok(())
    }
}

fn check_single_channel(m: &EquirectMap, what: &str) -> Result<()> {
    if m.channels() != 1 {
        return Err(Error::Shape(format!(
            "{what} must be single-channel, got {} channels",
            m.channels()
        )));
    }
    Ok(())
}

fn check_pair(a: &EquirectMap, b: &EquirectMap) -> Result<()> {
    check_single_channel(a, "saliency map")?;
    check_single_channel(b, "saliency map")?;
    if a.tensor().dims() != b.tensor().dims() {
        return Err(Error::Shape(format!(
            "map dims {:?} vs {:?} do not match",
            a.tensor().dims(),
            b.tensor().dims()
        )));
    }
    Ok(())
}

fn check_flow(m: &EquirectMap, flow: &FlowField) -> Result<()> {
    if flow.height() != m.height() || flow.width() != m.width() {
        return Err(Error::Shape(format!(
            "flow {}x{} does not match map {}x{}",
            flow.height(),
            flow.width(),
            m.height(),
            m.width()
        )));
    }
    Ok(())
}

/// Backward warp: output(x, y) samples `prev` at (x + dx, y + dy), bilinear
/// with horizontal wrap and vertical clamp. Zero flow is an exact identity.
pub fn warp(prev: &EquirectMap, flow: &FlowField) -> Result<EquirectMap> {
    check_single_channel(prev, "warp input")?;
    check_flow(prev, flow)?;
    let (q, p) = (prev.height(), prev.width());
    let plane = prev.plane(0);
    let mut out = vec![0.0f32; q * p];
    for y in 0..q {
        for x in 0..p {
            let idx = y * p + x;
            let sx = x as f64 + flow.dx()[idx] as f64;
            let sy = y as f64 + flow.dy()[idx] as f64;
            out[idx] = sample_plane_wrap(plane, q, p, sx, sy);
        }
    }
    EquirectMap::from_parts(1, q, p, out)
}

/// Photometric error between the current map and the flow-warped previous
/// map: (1/N) * sum (O_t - warp(O_{t-1}, m))^2.
pub fn loss_recons(cur: &EquirectMap, prev: &EquirectMap, flow: &FlowField) -> Result<f64> {
    check_pair(cur, prev)?;
    check_flow(cur, flow)?;
    let warped = warp(prev, flow)?;
    let mut acc = 0.0f64;
    for (a, b) in cur.plane(0).iter().zip(warped.plane(0)) {
        let d = (*a - *b) as f64;
        acc += d * d;
    }
    Ok(acc / cur.tensor().len() as f64)
}

/// Frame-to-frame smoothness: (1/N) * sum (O_t - O_{t-1})^2.
pub fn loss_smooth(cur: &EquirectMap, prev: &EquirectMap) -> Result<f64> {
    check_pair(cur, prev)?;
    let mut acc = 0.0f64;
    for (a, b) in cur.plane(0).iter().zip(prev.plane(0)) {
        let d = (*a - *b) as f64;
        acc += d * d;
    }
    Ok(acc / cur.tensor().len() as f64)
}

/// Motion masking: response on pixels whose flow magnitude is at most
/// epsilon is penalized, (1/N) * sum_{|m| <= eps} O_t^2.
pub fn loss_motion(cur: &EquirectMap, flow: &FlowField, epsilon: f64) -> Result<f64> {
    check_single_channel(cur, "saliency map")?;
    check_flow(cur, flow)?;
    let mut acc = 0.0f64;
    for (idx, &v) in cur.plane(0).iter().enumerate() {
        if (flow.magnitude(idx) as f64) <= epsilon {
            acc += (v as f64) * (v as f64);
        }
    }
    Ok(acc / cur.tensor().len() as f64)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepLoss {
    pub recons: f64,
    pub smooth: f64,
    pub motion: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LossBreakdown {
    pub steps: Vec<StepLoss>,
    pub recons: f64,
    pub smooth: f64,
    pub motion: f64,
    pub total: f64,
}

/// Weighted sum over the sequence; step t needs map t, map t-1 and the flow
/// t-1 -> t, so `flows.len()` must be `maps.len() - 1`.
pub fn loss_total(
    maps: &[EquirectMap],
    flows: &[FlowField],
    weights: &LossWeights,
) -> Result<LossBreakdown> {
    weights.validate()?;
    if maps.len() < 2 {
        return Err(Error::Argument(format!(
            "need at least 2 maps for temporal losses, got {}",
            maps.len()
        )));
    }
    if flows.len() != maps.len() - 1 {
        return Err(Error::Argument(format!(
            "{} maps need {} flows, got {}",
            maps.len(),
            maps.len() - 1,
            flows.len()
        )));
    }
    let mut steps = Vec::with_capacity(maps.len() - 1);
    let (mut tr, mut ts, mut tm) = (0.0f64, 0.0f64, 0.0f64);
    for t in 1..maps.len() {
        let recons = loss_recons(&maps[t], &maps[t - 1], &flows[t - 1])?;
        let smooth = loss_smooth(&maps[t], &maps[t - 1])?;
        let motion = loss_motion(&maps[t], &flows[t - 1], weights.epsilon)?;
        let total =
            weights.lambda_r * recons + weights.lambda_s * smooth + weights.lambda_m * motion;
        steps.push(StepLoss {
            recons,
            smooth,
            motion,
            total,
        });
        tr += recons;
        ts += smooth;
        tm += motion;
    }
    let total = weights.lambda_r * tr + weights.lambda_s * ts + weights.lambda_m * tm;
    Ok(LossBreakdown {
        steps,
        recons: tr,
        smooth: ts,
        motion: tm,
        total,
    })
}

/// Analytic gradient of one step total with respect to the current map:
/// (2/N) [ lr (O_t - warp(O_{t-1})) + ls (O_t - O_{t-1}) + lm mask O_t ].
pub fn loss_grad(
    cur: &EquirectMap,
    prev: &EquirectMap,
    flow: &FlowField,
    weights: &LossWeights,
) -> Result<EquirectMap> {
    weights.validate()?;
    check_pair(cur, prev)?;
    check_flow(cur, flow)?;
    let warped = warp(prev, flow)?;
    let n = cur.tensor().len() as f64;
    let (q, p) = (cur.height(), cur.width());
    let mut out = vec![0.0f32; q * p];
    for (idx, g_out) in out.iter_mut().enumerate() {
        let o = cur.plane(0)[idx] as f64;
        let wv = warped.plane(0)[idx] as f64;
        let pv = prev.plane(0)[idx] as f64;
        let masked = if (flow.magnitude(idx) as f64) <= weights.epsilon {
            o
        } else {
            0.0
        };
        let g = 2.0 / n
            * (weights.lambda_r * (o - wv) + weights.lambda_s * (o - pv) + weights.lambda_m * masked);
        *g_out = g as f32;
    }
    EquirectMap::from_parts(1, q, p, out)
}

/// Synthetic flow fields for tests and the `gen-flow` command.
pub mod flowgen {
    use super::*;

    /// Uniform translation by (dx, dy) pixels per frame.
    pub fn constant(q: usize, p: usize, dx: f32, dy: f32) -> FlowField {
        let n = q * p;
        let mut data = vec![dx; n];
        data.extend(std::iter::repeat_n(dy, n));
        FlowField::new(Tensor::new(vec![2, q, p], data).unwrap()).unwrap()
    }

    /// Whole-sphere rotation in longitude; on the equirect grid this is a
    /// uniform horizontal shift of speed_deg degrees per frame.
    pub fn rotation(q: usize, p: usize, speed_deg: f64) -> FlowField {
        let dx = (speed_deg / 360.0 * p as f64) as f32;
        constant(q, p, dx, 0.0)
    }

    /// Translation confined to a disc of `radius` pixels around
    /// (cx, cy); zero flow elsewhere.
    pub fn blob(
        q: usize,
        p: usize,
        cx: f64,
        cy: f64,
        radius: f64,
        dx: f32,
        dy: f32,
    ) -> FlowField {
        let n = q * p;
        let mut data = vec![0.0f32; 2 * n];
        for y in 0..q {
            for x in 0..p {
                let ddx = x as f64 - cx;
                let ddy = y as f64 - cy;
                if ddx * ddx + ddy * ddy <= radius * radius {
                    data[y * p + x] = dx;
                    data[n + y * p + x] = dy;
                }
            }
        }
        FlowField::new(Tensor::new(vec![2, q, p], data).unwrap()).unwrap()
    }
}
