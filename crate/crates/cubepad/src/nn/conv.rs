//! Convolution, pooling, upsampling and the saliency head, all operating on
//! face stacks `[n, c, h, w]`. Cube padding requires the stack to actually
//! be a cubemap (n = 6, square faces); zero padding works for any stack.

use crate::error::{Error, Result};
use crate::padding::{cube_pad_plane, fill_interior, CornerFill};
use crate::tensor::{clamp_index, lerp, CubeMap, EquirectMap, Tensor, FACE_COUNT};

use super::{Activation, ConvLayer, NetworkSpec, PadMode, PoolLayer};

pub(crate) fn stack_dims(t: &Tensor) -> Result<(usize, usize, usize, usize)> {
    match t.dims() {
        [n, c, h, w] => Ok((*n, *c, *h, *w)),
        d => Err(Error::Shape(format!("expected [n, c, h, w] stack, got {d:?}"))),
    }
}

/// Materializes a padded copy of the stack. Zero-fill for `ZeroPad`;
/// neighbor-face gathers (average corners) for `CubePad`.
pub(crate) fn pad_stack(x: &Tensor, k: usize, mode: PadMode) -> Result<Tensor> {
    let (n, c, h, w) = stack_dims(x)?;
    if k == 0 {
        return Ok(x.clone());
    }
    let (hp, wp) = (h + 2 * k, w + 2 * k);
    let mut out = Tensor::zeros(&[n, c, hp, wp]);
    match mode {
        PadMode::ZeroPad => {
            for img in 0..n {
                for ch in 0..c {
                    let src = &x.data()[(img * c + ch) * h * w..(img * c + ch + 1) * h * w];
                    let dst = &mut out.data_mut()[(img * c + ch) * hp * wp..];
                    for j in 0..h {
                        dst[(j + k) * wp + k..(j + k) * wp + k + w]
                            .copy_from_slice(&src[j * w..(j + 1) * w]);
                    }
                }
            }
        }
        PadMode::CubePad => {
            if n != FACE_COUNT || h != w {
                return Err(Error::Shape(format!(
                    "cube padding needs a [6, c, w, w] stack, got [{n}, {c}, {h}, {w}]"
                )));
            }
            if k >= w {
                return Err(Error::Argument(format!(
                    "pad width {k} must be smaller than face width {w}"
                )));
            }
            for f in 0..FACE_COUNT {
                for ch in 0..c {
                    let base = (f * c + ch) * wp * wp;
                    let src = &x.data()[(f * c + ch) * w * w..(f * c + ch + 1) * w * w];
                    let dst = &mut out.data_mut()[base..base + wp * wp];
                    fill_interior(src, w, k, dst);
                    cube_pad_plane(x.data(), c, w, f, ch, k, CornerFill::Average, dst);
                }
            }
        }
    }
    Ok(out)
}

/// Valid cross-correlation of one padded image.
#[allow(clippy::too_many_arguments)]
fn conv_valid_image(
    input: &[f32],
    c_in: usize,
    h_in: usize,
    w_in: usize,
    kernel: &[f32],
    c_out: usize,
    kh: usize,
    kw: usize,
    bias: &[f32],
    stride: usize,
    relu: bool,
    out: &mut [f32],
    h_out: usize,
    w_out: usize,
) {
    for oc in 0..c_out {
        let out_plane = &mut out[oc * h_out * w_out..(oc + 1) * h_out * w_out];
        out_plane.fill(bias[oc]);
        for ic in 0..c_in {
            let in_plane = &input[ic * h_in * w_in..(ic + 1) * h_in * w_in];
            for ky in 0..kh {
                for kx in 0..kw {
                    let wgt = kernel[((oc * c_in + ic) * kh + ky) * kw + kx];
                    if stride == 1 {
                        for oy in 0..h_out {
                            let in_row = &in_plane[(oy + ky) * w_in + kx..(oy + ky) * w_in + kx + w_out];
                            let out_row = &mut out_plane[oy * w_out..(oy + 1) * w_out];
                            for (o, &v) in out_row.iter_mut().zip(in_row) {
                                *o += wgt * v;
                            }
                        }
                    } else {
                        for oy in 0..h_out {
                            let iy = oy * stride + ky;
                            for ox in 0..w_out {
                                out_plane[oy * w_out + ox] +=
                                    wgt * in_plane[iy * w_in + ox * stride + kx];
                            }
                        }
                    }
                }
            }
        }
        if relu {
            for v in out_plane.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
    }
}

/// Convolution over a stack with the given padding mode applied first.
pub(crate) fn conv_stack(x: &Tensor, layer: &ConvLayer, mode: PadMode) -> Result<Tensor> {
    let (n, c, h, w) = stack_dims(x)?;
    if c != layer.in_channels() {
        return Err(Error::Shape(format!(
            "conv expects {} input channels, got {c}",
            layer.in_channels()
        )));
    }
    let k = layer.pad_width();
    let padded = pad_stack(x, k, mode)?;
    let (hp, wp) = (h + 2 * k, w + 2 * k);
    let ks = layer.kernel_size();
    if hp < ks || wp < ks {
        return Err(Error::Shape(format!(
            "kernel {ks} larger than padded input {hp}x{wp}"
        )));
    }
    let h_out = (hp - ks) / layer.stride + 1;
    let w_out = (wp - ks) / layer.stride + 1;
    let c_out = layer.out_channels();
    let mut out = Tensor::zeros(&[n, c_out, h_out, w_out]);
    let relu = layer.activation == Activation::Relu;
    for img in 0..n {
        conv_valid_image(
            &padded.data()[img * c * hp * wp..(img + 1) * c * hp * wp],
            c,
            hp,
            wp,
            layer.kernel.data(),
            c_out,
            ks,
            ks,
            layer.bias.data(),
            layer.stride,
            relu,
            &mut out.data_mut()[img * c_out * h_out * w_out..(img + 1) * c_out * h_out * w_out],
            h_out,
            w_out,
        );
    }
    Ok(out)
}

/// Max pooling over a stack; zero padding uses a 0.0 fill value (documented
/// artifact of the baseline), cube padding uses neighbor texels.
pub(crate) fn pool_stack(x: &Tensor, pool: &PoolLayer, mode: PadMode) -> Result<Tensor> {
    let (n, c, h, w) = stack_dims(x)?;
    let padded = pad_stack(x, pool.pad, mode)?;
    let (hp, wp) = (h + 2 * pool.pad, w + 2 * pool.pad);
    if pool.kernel > hp || pool.kernel > wp {
        return Err(Error::Shape(format!(
            "pool kernel {} larger than padded input {hp}x{wp}",
            pool.kernel
        )));
    }
    let h_out = (hp - pool.kernel) / pool.stride + 1;
    let w_out = (wp - pool.kernel) / pool.stride + 1;
    let mut out = Tensor::zeros(&[n, c, h_out, w_out]);
    for img in 0..n {
        for ch in 0..c {
            let plane = &padded.data()[(img * c + ch) * hp * wp..(img * c + ch + 1) * hp * wp];
            let out_plane =
                &mut out.data_mut()[(img * c + ch) * h_out * w_out..(img * c + ch + 1) * h_out * w_out];
            for oy in 0..h_out {
                for ox in 0..w_out {
                    let mut m = f32::NEG_INFINITY;
                    for ky in 0..pool.kernel {
                        let row = (oy * pool.stride + ky) * wp + ox * pool.stride;
                        for kx in 0..pool.kernel {
                            let v = plane[row + kx];
                            if v > m {
                                m = v;
                            }
                        }
                    }
                    out_plane[oy * w_out + ox] = m;
                }
            }
        }
    }
    Ok(out)
}

/// Bilinear upsampling by an integer factor (align-corners-false).
pub fn upsample_stack(x: &Tensor, factor: usize) -> Result<Tensor> {
    let (n, c, h, w) = stack_dims(x)?;
    if factor == 0 {
        return Err(Error::Argument("upsample factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(x.clone());
    }
    let (oh, ow) = (h * factor, w * factor);
    let mut out = Tensor::zeros(&[n, c, oh, ow]);
    let inv = 1.0 / factor as f64;
    for img in 0..n {
        for ch in 0..c {
            let src = &x.data()[(img * c + ch) * h * w..(img * c + ch + 1) * h * w];
            let dst = &mut out.data_mut()[(img * c + ch) * oh * ow..(img * c + ch + 1) * oh * ow];
            resample_plane(src, h, w, dst, oh, ow, inv);
        }
    }
    Ok(out)
}

/// Align-corners-false bilinear resample with clamped borders; `scale` is
/// input-per-output step.
pub(crate) fn resample_plane(
    src: &[f32],
    h: usize,
    w: usize,
    dst: &mut [f32],
    oh: usize,
    ow: usize,
    scale: f64,
) {
    for oy in 0..oh {
        let sy = (oy as f64 + 0.5) * scale - 0.5;
        let y0f = sy.floor();
        let fy = (sy - y0f) as f32;
        let y0 = clamp_index(y0f as i64, h);
        let y1 = clamp_index(y0f as i64 + 1, h);
        for ox in 0..ow {
            let sx = (ox as f64 + 0.5) * scale - 0.5;
            let x0f = sx.floor();
            let fx = (sx - x0f) as f32;
            let x0 = clamp_index(x0f as i64, w);
            let x1 = clamp_index(x0f as i64 + 1, w);
            let top = lerp(src[y0 * w + x0], src[y0 * w + x1], fx);
            let bot = lerp(src[y1 * w + x0], src[y1 * w + x1], fx);
            dst[oy * ow + ox] = lerp(top, bot, fy);
        }
    }
}

/// 1x1 convolution by the classifier weights: per-pixel linear map from
/// feature channels to class channels.
pub(crate) fn head_stack(x: &Tensor, head: &Tensor) -> Result<Tensor> {
    let (n, c, h, w) = stack_dims(x)?;
    let hd = head.dims();
    if hd.len() != 4 || hd[1] != c || hd[2] != 1 || hd[3] != 1 {
        return Err(Error::Shape(format!(
            "head dims {hd:?} incompatible with {c} feature channels"
        )));
    }
    let classes = hd[0];
    let mut out = Tensor::zeros(&[n, classes, h, w]);
    for img in 0..n {
        for kc in 0..classes {
            let out_plane =
                &mut out.data_mut()[(img * classes + kc) * h * w..(img * classes + kc + 1) * h * w];
            for ic in 0..c {
                let wgt = head.data()[kc * c + ic];
                let in_plane = &x.data()[(img * c + ic) * h * w..(img * c + ic + 1) * h * w];
                for (o, &v) in out_plane.iter_mut().zip(in_plane) {
                    *o += wgt * v;
                }
            }
        }
    }
    Ok(out)
}

/// Per-pixel max across the channel dimension.
pub(crate) fn channel_max_stack(x: &Tensor) -> Result<Tensor> {
    let (n, c, h, w) = stack_dims(x)?;
    if c == 0 {
        return Err(Error::Shape("channel max needs at least one channel".into()));
    }
    let mut out = Tensor::zeros(&[n, 1, h, w]);
    for img in 0..n {
        let dst = &mut out.data_mut()[img * h * w..(img + 1) * h * w];
        dst.copy_from_slice(&x.data()[img * c * h * w..img * c * h * w + h * w]);
        for ch in 1..c {
            let plane = &x.data()[(img * c + ch) * h * w..(img * c + ch + 1) * h * w];
            for (o, &v) in dst.iter_mut().zip(plane) {
                if v > *o {
                    *o = v;
                }
            }
        }
    }
    Ok(out)
}

// ------------------------------------------------------------------
// Typed cubemap/equirect wrappers
// ------------------------------------------------------------------

/// Convolution over a cubemap using the layer's own padding mode.
pub fn conv2d(x: &CubeMap, layer: &ConvLayer) -> Result<CubeMap> {
    conv_stack(x.tensor(), layer, layer.pad_mode).and_then(CubeMap::new)
}

pub fn maxpool(x: &CubeMap, kernel: usize, stride: usize, pad: usize, mode: PadMode) -> Result<CubeMap> {
    let pool = PoolLayer::new(kernel, stride, pad, mode)?;
    pool_stack(x.tensor(), &pool, mode).and_then(CubeMap::new)
}

pub fn upsample_cubemap(x: &CubeMap, factor: usize) -> Result<CubeMap> {
    upsample_stack(x.tensor(), factor).and_then(CubeMap::new)
}

pub fn upsample_equirect(m: &EquirectMap, factor: usize) -> Result<EquirectMap> {
    let d = m.tensor().dims();
    let as_stack = Tensor::new(vec![1, d[0], d[1], d[2]], m.tensor().data().to_vec())?;
    let up = upsample_stack(&as_stack, factor)?;
    let od = up.dims().to_vec();
    EquirectMap::new(Tensor::new(vec![od[1], od[2], od[3]], up.into_data())?)
}

/// `M_S = M_l * W_fc` as a 1x1 convolution.
pub fn saliency_head(x: &CubeMap, head: &Tensor) -> Result<CubeMap> {
    head_stack(x.tensor(), head).and_then(CubeMap::new)
}

/// `S(x, y) = max_k M_S(k, x, y)` per face.
pub fn channel_max(x: &CubeMap) -> Result<CubeMap> {
    channel_max_stack(x.tensor()).and_then(CubeMap::new)
}

/// Runs the layer chain over a stack, forcing `mode` onto every conv/pool
/// layer; returns the per-class activation stack from the head.
pub(crate) fn run_layers(x: &Tensor, net: &NetworkSpec, mode: PadMode) -> Result<Tensor> {
    let mut cur = None::<Tensor>;
    for layer in &net.layers {
        let input = cur.as_ref().unwrap_or(x);
        let next = match layer {
            super::Layer::Conv(conv) => conv_stack(input, conv, mode)?,
            super::Layer::MaxPool(pool) => pool_stack(input, pool, mode)?,
            super::Layer::Upsample { factor } => upsample_stack(input, *factor)?,
        };
        cur = Some(next);
    }
    head_stack(cur.as_ref().unwrap_or(x), &net.head)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded_tensor(dims: &[usize], seed: u32) -> Tensor {
        let len: usize = dims.iter().product();
        let data: Vec<f32> = (0..len)
            .map(|i| {
                let x = (i as u32).wrapping_mul(2654435761).wrapping_add(seed);
                ((x >> 8) as f32 / (1u32 << 24) as f32) * 2.0 - 1.0
            })
            .collect();
        Tensor::new(dims.to_vec(), data).unwrap()
    }

    fn conv_layer(c_out: usize, c_in: usize, k: usize, seed: u32, mode: PadMode) -> ConvLayer {
        ConvLayer::new(
            seeded_tensor(&[c_out, c_in, k, k], seed),
            seeded_tensor(&[c_out], seed ^ 0xffff),
            1,
            mode,
            Activation::None,
        )
        .unwrap()
    }

    /// Direct-index convolution oracle, summation order deliberately
    /// different from the implementation.
    fn naive_conv(x: &Tensor, layer: &ConvLayer, mode: PadMode) -> Tensor {
        let (n, c, h, w) = stack_dims(x).unwrap();
        let k = layer.pad_width();
        let padded = pad_stack(x, k, mode).unwrap();
        let (hp, wp) = (h + 2 * k, w + 2 * k);
        let ks = layer.kernel_size();
        let s = layer.stride;
        let h_out = (hp - ks) / s + 1;
        let w_out = (wp - ks) / s + 1;
        let c_out = layer.out_channels();
        let mut out = Tensor::zeros(&[n, c_out, h_out, w_out]);
        for img in 0..n {
            for oc in 0..c_out {
                for oy in 0..h_out {
                    for ox in 0..w_out {
                        let mut acc = layer.bias.data()[oc];
                        for ky in 0..ks {
                            for kx in 0..ks {
                                for ic in 0..c {
                                    let iv = padded.data()
                                        [((img * c + ic) * hp + oy * s + ky) * wp + ox * s + kx];
                                    let kv =
                                        layer.kernel.data()[((oc * c + ic) * ks + ky) * ks + kx];
                                    acc += iv * kv;
                                }
                            }
                        }
                        if layer.activation == Activation::Relu && acc < 0.0 {
                            acc = 0.0;
                        }
                        out.data_mut()[((img * c_out + oc) * h_out + oy) * w_out + ox] = acc;
                    }
                }
            }
        }
        out
    }

    fn naive_pool(x: &Tensor, pool: &PoolLayer, mode: PadMode) -> Tensor {
        let (n, c, h, w) = stack_dims(x).unwrap();
        let padded = pad_stack(x, pool.pad, mode).unwrap();
        let (hp, wp) = (h + 2 * pool.pad, w + 2 * pool.pad);
        let h_out = (hp - pool.kernel) / pool.stride + 1;
        let w_out = (wp - pool.kernel) / pool.stride + 1;
        let mut out = Tensor::zeros(&[n, c, h_out, w_out]);
        for img in 0..n {
            for ch in 0..c {
                for oy in 0..h_out {
                    for ox in 0..w_out {
                        let mut m = f32::NEG_INFINITY;
                        for ky in 0..pool.kernel {
                            for kx in 0..pool.kernel {
                                m = m.max(
                                    padded.data()[((img * c + ch) * hp + oy * pool.stride + ky)
                                        * wp
                                        + ox * pool.stride
                                        + kx],
                                );
                            }
                        }
                        out.data_mut()[((img * c + ch) * h_out + oy) * w_out + ox] = m;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identity_1x1_kernel_is_identity() {
        let x = seeded_tensor(&[6, 2, 5, 5], 7);
        let mut kdata = vec![0.0f32; 2 * 2];
        kdata[0] = 1.0;
        kdata[3] = 1.0;
        let layer = ConvLayer::new(
            Tensor::new(vec![2, 2, 1, 1], kdata).unwrap(),
            Tensor::new(vec![2], vec![0.0, 0.0]).unwrap(),
            1,
            PadMode::CubePad,
            Activation::None,
        )
        .unwrap();
        let y = conv_stack(&x, &layer, PadMode::CubePad).unwrap();
        assert_eq!(x.data(), y.data());
    }

    #[test]
    fn box_kernel_constant_propagation_vs_zero_leak() {
        let x = Tensor::full(&[6, 1, 8, 8], 0.5);
        let layer = ConvLayer::new(
            Tensor::new(vec![1, 1, 3, 3], vec![1.0 / 9.0; 9]).unwrap(),
            Tensor::new(vec![1], vec![0.0]).unwrap(),
            1,
            PadMode::CubePad,
            Activation::None,
        )
        .unwrap();
        let cp = conv_stack(&x, &layer, PadMode::CubePad).unwrap();
        for &v in cp.data() {
            assert!((v - 0.5).abs() <= 1e-6);
        }
        let zp = conv_stack(&x, &layer, PadMode::ZeroPad).unwrap();
        let border = zp.data()[0]; // top-left corner of first face
        assert!(border < 0.5 - 0.1, "zero pad should depress borders, got {border}");
    }

    #[test]
    fn conv_matches_naive_oracle() {
        for (w, c_in, c_out, ks, seed) in
            [(8usize, 3usize, 4usize, 3usize, 1u32), (8, 2, 2, 5, 2), (16, 1, 3, 3, 3)]
        {
            for mode in [PadMode::CubePad, PadMode::ZeroPad] {
                let x = seeded_tensor(&[6, c_in, w, w], seed);
                let layer = conv_layer(c_out, c_in, ks, seed * 31, mode);
                let got = conv_stack(&x, &layer, mode).unwrap();
                let want = naive_conv(&x, &layer, mode);
                for (a, b) in got.data().iter().zip(want.data()) {
                    assert!((a - b).abs() <= 1e-5, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn strided_conv_shape_and_oracle() {
        let x = seeded_tensor(&[6, 2, 8, 8], 9);
        let mut layer = conv_layer(3, 2, 3, 77, PadMode::ZeroPad);
        layer.stride = 2;
        let got = conv_stack(&x, &layer, PadMode::ZeroPad).unwrap();
        assert_eq!(got.dims(), &[6, 3, 4, 4]);
        let want = naive_conv(&x, &layer, PadMode::ZeroPad);
        for (a, b) in got.data().iter().zip(want.data()) {
            assert!((a - b).abs() <= 1e-5);
        }
    }

    #[test]
    fn pool_matches_naive_oracle_exactly() {
        for (kernel, stride, pad) in [(2usize, 2usize, 0usize), (3, 1, 1), (3, 2, 1)] {
            for mode in [PadMode::CubePad, PadMode::ZeroPad] {
                let x = seeded_tensor(&[6, 2, 8, 8], kernel as u32 * 7 + stride as u32);
                let pool = PoolLayer::new(kernel, stride, pad, mode).unwrap();
                let got = pool_stack(&x, &pool, mode).unwrap();
                let want = naive_pool(&x, &pool, mode);
                assert_eq!(got.data(), want.data());
            }
        }
    }

    #[test]
    fn pool_constant_halves_resolution() {
        let x = Tensor::full(&[6, 1, 8, 8], 0.3);
        let pool = PoolLayer::new(2, 2, 0, PadMode::CubePad).unwrap();
        let y = pool_stack(&x, &pool, PadMode::CubePad).unwrap();
        assert_eq!(y.dims(), &[6, 1, 4, 4]);
        assert!(y.data().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn zero_pad_pool_leaks_zeros_into_negative_maps() {
        let x = Tensor::full(&[6, 1, 4, 4], -1.0);
        let pool = PoolLayer::new(3, 1, 1, PadMode::ZeroPad).unwrap();
        let zp = pool_stack(&x, &pool, PadMode::ZeroPad).unwrap();
        assert_eq!(zp.data()[0], 0.0); // border window sees the zero fill
        let cp = pool_stack(&x, &pool, PadMode::CubePad).unwrap();
        assert!(cp.data().iter().all(|&v| v == -1.0));
    }

    #[test]
    fn upsample_basics() {
        let x = seeded_tensor(&[1, 1, 4, 4], 21);
        let same = upsample_stack(&x, 1).unwrap();
        assert_eq!(same.data(), x.data());

        let c = Tensor::full(&[2, 3, 4, 4], 0.8);
        let up = upsample_stack(&c, 2).unwrap();
        assert_eq!(up.dims(), &[2, 3, 8, 8]);
        assert!(up.data().iter().all(|&v| v == 0.8));
    }

    #[test]
    fn upsample_row_hand_values() {
        let x = Tensor::new(vec![1, 1, 1, 2], vec![1.0, 3.0]).unwrap();
        let up = upsample_stack(&x, 2).unwrap();
        let row = &up.data()[0..4];
        assert_eq!(row, &[1.0, 1.5, 2.5, 3.0]);
    }

    #[test]
    fn head_and_channel_max() {
        let x = seeded_tensor(&[6, 2, 4, 4], 5);
        // identity head (K = c)
        let head = Tensor::new(vec![2, 2, 1, 1], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let y = head_stack(&x, &head).unwrap();
        assert_eq!(y.data(), x.data());

        let zero_head = Tensor::zeros(&[3, 2, 1, 1]);
        let z = head_stack(&x, &zero_head).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));

        // dot product example: [0.5, -0.5] . [1.0, 0.4] = 0.3
        let one_px = Tensor::new(vec![1, 2, 1, 1], vec![1.0, 0.4]).unwrap();
        let head2 = Tensor::new(vec![1, 2, 1, 1], vec![0.5, -0.5]).unwrap();
        let v = head_stack(&one_px, &head2).unwrap();
        assert!((v.data()[0] - 0.3).abs() <= 1e-7);

        let mx = channel_max_stack(&x).unwrap();
        assert_eq!(mx.dims(), &[6, 1, 4, 4]);
        for img in 0..6 {
            for i in 0..16 {
                let a = x.data()[img * 32 + i];
                let b = x.data()[img * 32 + 16 + i];
                assert_eq!(mx.data()[img * 16 + i], a.max(b));
            }
        }
        // single channel: identity
        let single = seeded_tensor(&[6, 1, 4, 4], 11);
        assert_eq!(channel_max_stack(&single).unwrap().data(), single.data());
    }

    #[test]
    fn receptive_field_crosses_faces_one_texel_per_conv() {
        let w = 8usize;
        let mut x = Tensor::zeros(&[6, 1, w, w]);
        // impulse on front face at the middle of the right edge
        let f = crate::sphere::FaceId::Front.index();
        x.data_mut()[(f * w + w / 2) * w + (w - 1)] = 1.0;
        let layer = ConvLayer::new(
            Tensor::new(vec![1, 1, 3, 3], vec![1.0; 9]).unwrap(),
            Tensor::new(vec![1], vec![0.0]).unwrap(),
            1,
            PadMode::CubePad,
            Activation::None,
        )
        .unwrap();
        let r = crate::sphere::FaceId::Right.index();
        let mut cur = x;
        for n in 1..=3 {
            cur = conv_stack(&cur, &layer, PadMode::CubePad).unwrap();
            let right_face = &cur.data()[r * w * w..(r + 1) * w * w];
            let deepest = (0..w * w)
                .filter(|&i| right_face[i] != 0.0)
                .map(|i| i % w)
                .max();
            assert_eq!(deepest, Some(n - 1), "after {n} convs");
        }
    }

    #[test]
    fn conv_rejects_channel_mismatch() {
        let x = seeded_tensor(&[6, 3, 4, 4], 1);
        let layer = conv_layer(2, 2, 3, 5, PadMode::ZeroPad);
        assert!(conv_stack(&x, &layer, PadMode::ZeroPad).is_err());
    }

    #[test]
    fn constant_propagation_through_all_layer_kinds() {
        let x = Tensor::full(&[6, 2, 8, 8], 0.4);
        let conv = ConvLayer::new(
            Tensor::new(vec![2, 2, 3, 3], vec![1.0 / 18.0; 36]).unwrap(),
            Tensor::new(vec![2], vec![0.1, 0.1]).unwrap(),
            1,
            PadMode::CubePad,
            Activation::Relu,
        )
        .unwrap();
        let y = conv_stack(&x, &conv, PadMode::CubePad).unwrap();
        let expect = y.data()[0];
        assert!(y.data().iter().all(|&v| (v - expect).abs() <= 1e-6 * expect.abs().max(1.0)));
        let pool = PoolLayer::new(3, 1, 1, PadMode::CubePad).unwrap();
        let z = pool_stack(&y, &pool, PadMode::CubePad).unwrap();
        assert!(z.data().iter().all(|&v| (v - expect).abs() <= 1e-6 * expect.abs().max(1.0)));
        let u = upsample_stack(&z, 2).unwrap();
        assert!(u.data().iter().all(|&v| (v - expect).abs() <= 1e-6 * expect.abs().max(1.0)));
    }
}
