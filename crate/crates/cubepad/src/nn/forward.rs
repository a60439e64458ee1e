//! The four forward pipelines: cube-padded, zero-padded, plain
//! equirectangular, and the overlapping-face baseline, in both static and
//! ConvLSTM-driven temporal form.
//!
//! Pipeline shape, cube modes: project at w = p/4 -> layer chain -> head ->
//! channel max -> post maxpool -> inverse projection -> upsample -> min-max
//! normalize. The equirect mode skips the projections and runs the layers
//! zero-padded on the full raster; overlap renders enlarged faces, runs them
//! zero-padded, and crops back to the central 90 degrees before the inverse
//! projection.

use crate::error::{Error, Result};
use crate::padding::{render_overlap_faces, CropSpec};
use crate::sphere::{cubemap_to_equirect, equirect_to_cubemap};
use crate::tensor::{CubeMap, EquirectMap, Tensor};

use super::conv::{channel_max_stack, pool_stack, resample_plane, run_layers, stack_dims, upsample_stack};
use super::lstm::{convlstm_step, ConvLstmState, ConvLstmWeights};
use super::{NetworkSpec, PadMode, PoolLayer};

/// Which projection/padding variant a forward pass uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineMode {
    /// Cubemap trunk with cube padding.
    CubePad,
    /// Cubemap trunk with zero padding.
    ZeroPad,
    /// The layer chain runs directly on the equirectangular raster.
    Equirect,
    /// Enlarged-FoV faces with zero padding, cropped back to 90 degrees.
    Overlap,
}

impl PipelineMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp" | "cube" | "cubemap_cp" => Ok(PipelineMode::CubePad),
            "zp" | "zero" | "cubemap_zp" => Ok(PipelineMode::ZeroPad),
            "equi" | "equirect" => Ok(PipelineMode::Equirect),
            "overlap" => Ok(PipelineMode::Overlap),
            other => Err(Error::Argument(format!("unknown pipeline mode '{other}'"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PipelineMode::CubePad => "CUBEMAP_CP",
            PipelineMode::ZeroPad => "CUBEMAP_ZP",
            PipelineMode::Equirect => "EQUI",
            PipelineMode::Overlap => "OVERLAP",
        }
    }

    fn pad_mode(self) -> PadMode {
        match self {
            PipelineMode::CubePad => PadMode::CubePad,
            _ => PadMode::ZeroPad,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForwardOptions {
    /// Kernel of the shape-preserving post maxpool; values < 2 disable it.
    pub post_pool: usize,
    /// Field of view of the overlap baseline faces.
    pub overlap_fov: f64,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        ForwardOptions {
            post_pool: 3,
            overlap_fov: 120f64.to_radians(),
        }
    }
}

enum TrunkKind {
    Cube,
    Flat,
    Overlap { crop: CropSpec, render_width: usize },
}

struct TrunkOut {
    class_maps: Tensor,
    kind: TrunkKind,
}

fn check_canonical(frame: &EquirectMap, needs_quarter: bool) -> Result<(usize, usize)> {
    let (q, p) = (frame.height(), frame.width());
    if p != 2 * q {
        return Err(Error::Argument(format!(
            "canonical frame needs p = 2q, got p={p} q={q}"
        )));
    }
    if needs_quarter && p % 4 != 0 {
        return Err(Error::Argument(format!(
            "cubemap pipeline needs p divisible by 4, got p={p}"
        )));
    }
    Ok((q, p))
}

/// Runs projection + layer chain + head, leaving the per-class stack in the
/// geometry of its trunk.
fn run_trunk(
    frame: &EquirectMap,
    net: &NetworkSpec,
    mode: PipelineMode,
    opts: &ForwardOptions,
) -> Result<TrunkOut> {
    net.validate(frame.channels())?;
    match mode {
        PipelineMode::CubePad | PipelineMode::ZeroPad => {
            let (_, p) = check_canonical(frame, true)?;
            let cube = equirect_to_cubemap(frame, p / 4)?;
            let class_maps = run_layers(cube.tensor(), net, mode.pad_mode())?;
            Ok(TrunkOut {
                class_maps,
                kind: TrunkKind::Cube,
            })
        }
        PipelineMode::Equirect => {
            let (q, p) = check_canonical(frame, false)?;
            let stack = Tensor::new(
                vec![1, frame.channels(), q, p],
                frame.tensor().data().to_vec(),
            )?;
            let class_maps = run_layers(&stack, net, PadMode::ZeroPad)?;
            Ok(TrunkOut {
                class_maps,
                kind: TrunkKind::Flat,
            })
        }
        PipelineMode::Overlap => {
            let (_, p) = check_canonical(frame, true)?;
            let (faces, crop) = render_overlap_faces(frame, p / 4, opts.overlap_fov)?;
            let render_width = faces.dims()[2];
            let class_maps = run_layers(&faces, net, PadMode::ZeroPad)?;
            Ok(TrunkOut {
                class_maps,
                kind: TrunkKind::Overlap { crop, render_width },
            })
        }
    }
}

fn crop_stack(x: &Tensor, crop: &CropSpec) -> Result<Tensor> {
    let (n, c, h, w) = stack_dims(x)?;
    let end = crop.offset + crop.size;
    if end > h || end > w {
        return Err(Error::Shape(format!(
            "crop {crop:?} exceeds {h}x{w} stack"
        )));
    }
    let s = crop.size;
    let mut out = Tensor::zeros(&[n, c, s, s]);
    for img in 0..n {
        for ch in 0..c {
            let src = &x.data()[(img * c + ch) * h * w..(img * c + ch + 1) * h * w];
            let dst = &mut out.data_mut()[(img * c + ch) * s * s..(img * c + ch + 1) * s * s];
            for j in 0..s {
                dst[j * s..(j + 1) * s].copy_from_slice(
                    &src[(crop.offset + j) * w + crop.offset..(crop.offset + j) * w + end],
                );
            }
        }
    }
    Ok(out)
}

/// Scales the overlap crop rectangle onto a downsampled feature stack.
fn scale_crop(crop: &CropSpec, h_in: usize, h_out: usize) -> CropSpec {
    if h_in == h_out {
        return *crop;
    }
    let s = h_out as f64 / h_in as f64;
    let offset = (crop.offset as f64 * s).round() as usize;
    let size = ((crop.size as f64 * s).round() as usize).max(1);
    let size = size.min(h_out.saturating_sub(offset)).max(1);
    CropSpec { offset, size }
}

/// Min-max normalization to [0, 1]; spatially flat maps become all-zero.
fn normalize_map(mut m: EquirectMap) -> EquirectMap {
    let data = m.tensor().data();
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for &v in data {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let range = hi - lo;
    let t = m.tensor_mut();
    if range <= 0.0 {
        t.data_mut().fill(0.0);
    } else {
        for v in t.data_mut() {
            *v = (*v - lo) / range;
        }
    }
    m
}

/// channel max -> post maxpool -> inverse projection -> upsample ->
/// normalize, shared by the static and temporal paths.
fn postprocess(
    class_maps: &Tensor,
    kind: &TrunkKind,
    mode: PipelineMode,
    opts: &ForwardOptions,
    out_q: usize,
    out_p: usize,
) -> Result<EquirectMap> {
    let sal = channel_max_stack(class_maps)?;
    let sal = if opts.post_pool >= 2 {
        let pad = (opts.post_pool - 1) / 2;
        let pool = PoolLayer::new(opts.post_pool, 1, pad, mode.pad_mode())?;
        pool_stack(&sal, &pool, mode.pad_mode())?
    } else {
        sal
    };

    let equirect = match kind {
        TrunkKind::Cube => cube_to_map(&sal, out_q, out_p)?,
        TrunkKind::Overlap { crop, render_width } => {
            let (_, _, h, _) = stack_dims(&sal)?;
            let scaled = scale_crop(crop, *render_width, h);
            let cropped = crop_stack(&sal, &scaled)?;
            cube_to_map(&cropped, out_q, out_p)?
        }
        TrunkKind::Flat => {
            let (_, _, h, w) = stack_dims(&sal)?;
            if out_p.is_multiple_of(w) && out_q.is_multiple_of(h) && out_p / w == out_q / h {
                let up = upsample_stack(&sal, out_p / w)?;
                let d = up.dims().to_vec();
                EquirectMap::new(Tensor::new(vec![1, d[2], d[3]], up.into_data())?)?
            } else {
                let mut out = vec![0.0f32; out_q * out_p];
                resample_plane(
                    &sal.data()[..h * w],
                    h,
                    w,
                    &mut out,
                    out_q,
                    out_p,
                    w as f64 / out_p as f64,
                );
                EquirectMap::from_parts(1, out_q, out_p, out)?
            }
        }
    };
    Ok(normalize_map(equirect))
}

/// Inverse projection of a [6, 1, w, w] stack, rendered at the native 4w
/// equirect width and upsampled to the requested size (or rendered directly
/// when the sizes do not chain by an integer factor).
fn cube_to_map(sal: &Tensor, out_q: usize, out_p: usize) -> Result<EquirectMap> {
    let cube = CubeMap::new(sal.clone())?;
    let w = cube.width();
    let native_p = 4 * w;
    if native_p <= out_p && out_p.is_multiple_of(native_p) {
        let native = cubemap_to_equirect(&cube, native_p, native_p / 2)?;
        crate::nn::upsample_equirect(&native, out_p / native_p)
    } else {
        cubemap_to_equirect(&cube, out_p, out_q)
    }
}

/// Static saliency pipeline; output is a normalized [1, q, p] map matching
/// the input frame size.
pub fn forward_static(
    frame: &EquirectMap,
    net: &NetworkSpec,
    mode: PipelineMode,
    opts: &ForwardOptions,
) -> Result<EquirectMap> {
    let (q, p) = (frame.height(), frame.width());
    let trunk = run_trunk(frame, net, mode, opts)?;
    postprocess(&trunk.class_maps, &trunk.kind, mode, opts, q, p)
}

/// Temporal pipeline: static trunk per frame, ConvLSTM aggregation, channel
/// max over the hidden state, shared post-processing. State is
/// zero-initialized and resets every `z` frames.
pub fn forward_temporal(
    frames: &[EquirectMap],
    net: &NetworkSpec,
    lstm: &ConvLstmWeights,
    z: usize,
    mode: PipelineMode,
    opts: &ForwardOptions,
) -> Result<Vec<EquirectMap>> {
    if frames.is_empty() {
        return Err(Error::Argument("temporal pipeline needs at least one frame".into()));
    }
    if z == 0 {
        return Err(Error::Argument("sequence length z must be >= 1".into()));
    }
    if mode == PipelineMode::Overlap {
        return Err(Error::Argument(
            "the overlap baseline has no temporal variant".into(),
        ));
    }
    let dims = frames[0].tensor().dims().to_vec();
    let mut outputs = Vec::with_capacity(frames.len());
    let mut state: Option<ConvLstmState> = None;
    for (t, frame) in frames.iter().enumerate() {
        if frame.tensor().dims() != dims {
            return Err(Error::Shape(format!(
                "frame {t} dims {:?} differ from first frame {dims:?}",
                frame.tensor().dims()
            )));
        }
        if t % z == 0 {
            state = None;
        }
        let trunk = run_trunk(frame, net, mode, opts)?;
        if trunk.class_maps.dims()[1] != lstm.channels() {
            return Err(Error::Shape(format!(
                "trunk produces {} class channels, lstm expects {}",
                trunk.class_maps.dims()[1],
                lstm.channels()
            )));
        }
        let prev = match state {
            Some(s) => s,
            None => ConvLstmState::zeros_like(&trunk.class_maps)?,
        };
        let next = convlstm_step(&prev, &trunk.class_maps, lstm, mode.pad_mode())?;
        let out = postprocess(
            next.hidden(),
            &trunk.kind,
            mode,
            opts,
            frame.height(),
            frame.width(),
        )?;
        outputs.push(out);
        state = Some(next);
    }
    Ok(outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::manifest::generate_network;
    use crate::nn::{generate_convlstm, Activation, ConvLayer, Layer};

    fn smooth_frame(p: usize, seed: u32) -> EquirectMap {
        let q = p / 2;
        let mut data = vec![0.0f32; 3 * q * p];
        for ch in 0..3 {
            for y in 0..q {
                let lat = (0.5 - (y as f64 + 0.5) / q as f64) * std::f64::consts::PI;
                for x in 0..p {
                    let lon = ((x as f64 + 0.5) / p as f64 - 0.5) * std::f64::consts::TAU;
                    let v = 0.5
                        + 0.3 * ((lon * (1.0 + ch as f64) + seed as f64).sin() * lat.cos())
                        + 0.2 * lat.sin();
                    data[(ch * q + y) * p + x] = v as f32;
                }
            }
        }
        EquirectMap::from_parts(3, q, p, data).unwrap()
    }

    #[test]
    fn constant_frame_yields_zero_map() {
        let p = 64usize;
        let frame = EquirectMap::from_parts(3, p / 2, p, vec![0.25; 3 * p * p / 2]).unwrap();
        let net = generate_network(11, &[3, 4], 2, 3).unwrap();
        // cube padding keeps a constant frame spatially constant, so the
        // min-max normalization collapses it to all-zero
        let out =
            forward_static(&frame, &net, PipelineMode::CubePad, &ForwardOptions::default())
                .unwrap();
        assert_eq!(out.tensor().dims(), &[1, p / 2, p]);
        assert!(out.tensor().data().iter().all(|&v| v == 0.0));
        // the zero-padded variants leak borders by construction; they still
        // produce frame-sized maps
        for mode in [
            PipelineMode::ZeroPad,
            PipelineMode::Equirect,
            PipelineMode::Overlap,
        ] {
            let out = forward_static(&frame, &net, mode, &ForwardOptions::default()).unwrap();
            assert_eq!(out.tensor().dims(), &[1, p / 2, p], "{mode:?}");
        }
    }

    #[test]
    fn forward_static_is_deterministic() {
        let frame = smooth_frame(64, 3);
        let net = generate_network(5, &[3, 4], 2, 3).unwrap();
        let a = forward_static(&frame, &net, PipelineMode::CubePad, &ForwardOptions::default())
            .unwrap();
        let b = forward_static(&frame, &net, PipelineMode::CubePad, &ForwardOptions::default())
            .unwrap();
        for (x, y) in a.tensor().data().iter().zip(b.tensor().data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn rejects_non_canonical_frames() {
        let frame = EquirectMap::from_parts(3, 30, 64, vec![0.0; 3 * 30 * 64]).unwrap();
        let net = generate_network(5, &[3, 4], 2, 3).unwrap();
        assert!(matches!(
            forward_static(&frame, &net, PipelineMode::CubePad, &ForwardOptions::default()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn downsampling_trunk_still_outputs_frame_size() {
        let frame = smooth_frame(64, 9);
        let mut net = generate_network(7, &[3, 4], 2, 3).unwrap();
        net.layers.push(Layer::MaxPool(
            crate::nn::PoolLayer::new(2, 2, 0, PadMode::CubePad).unwrap(),
        ));
        for mode in [PipelineMode::CubePad, PipelineMode::Equirect] {
            let out = forward_static(&frame, &net, mode, &ForwardOptions::default()).unwrap();
            assert_eq!(out.tensor().dims(), &[1, 32, 64], "{mode:?}");
        }
    }

    #[test]
    fn temporal_zero_weights_yield_zero_maps() {
        let frames: Vec<EquirectMap> = (0..3).map(|i| smooth_frame(32, i)).collect();
        let net = generate_network(5, &[3, 4], 2, 3).unwrap();
        let lstm = crate::nn::ConvLstmWeights::zeros(2);
        let outs = forward_temporal(
            &frames,
            &net,
            &lstm,
            5,
            PipelineMode::CubePad,
            &ForwardOptions::default(),
        )
        .unwrap();
        assert_eq!(outs.len(), 3);
        for o in outs {
            assert!(o.tensor().data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn temporal_state_resets_every_z_frames() {
        let a = smooth_frame(32, 1);
        let b = smooth_frame(32, 2);
        let frames = vec![a.clone(), b.clone(), a.clone(), b];
        let net = generate_network(5, &[3, 4], 2, 3).unwrap();
        let lstm = generate_convlstm(9, 2).unwrap();
        let outs = forward_temporal(
            &frames,
            &net,
            &lstm,
            2,
            PipelineMode::CubePad,
            &ForwardOptions::default(),
        )
        .unwrap();
        // chunks [0,1] and [2,3] see identical inputs from a fresh state
        for (x, y) in outs[0].tensor().data().iter().zip(outs[2].tensor().data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in outs[1].tensor().data().iter().zip(outs[3].tensor().data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn temporal_tracking_lstm_correlates_with_static() {
        // weights chosen so H ~ tanh(tanh(M_S)): open input/output gates,
        // identity candidate kernel
        let k = 2usize;
        let mut lstm = crate::nn::ConvLstmWeights::zeros(k);
        lstm.b_i.data_mut().fill(20.0);
        lstm.b_o.data_mut().fill(20.0);
        for ch in 0..k {
            // center tap of the [ch, ch] kernel
            lstm.w_xc.data_mut()[((ch * k + ch) * 3 + 1) * 3 + 1] = 1.0;
        }
        let net = generate_network(5, &[3, 4], k, 3).unwrap();
        let frame = smooth_frame(64, 4);
        let static_out =
            forward_static(&frame, &net, PipelineMode::CubePad, &ForwardOptions::default())
                .unwrap();
        let temporal_out = forward_temporal(
            &[frame],
            &net,
            &lstm,
            1,
            PipelineMode::CubePad,
            &ForwardOptions::default(),
        )
        .unwrap();
        let cc = crate::eval::cc(&temporal_out[0], &static_out).unwrap();
        assert!(cc >= 0.9, "cc = {cc}");
    }

    #[test]
    fn temporal_rejects_bad_args() {
        let net = generate_network(5, &[3, 4], 2, 3).unwrap();
        let lstm = crate::nn::ConvLstmWeights::zeros(2);
        assert!(forward_temporal(
            &[],
            &net,
            &lstm,
            5,
            PipelineMode::CubePad,
            &ForwardOptions::default()
        )
        .is_err());
        let frame = smooth_frame(32, 0);
        assert!(forward_temporal(
            std::slice::from_ref(&frame),
            &net,
            &lstm,
            0,
            PipelineMode::CubePad,
            &ForwardOptions::default()
        )
        .is_err());
        assert!(forward_temporal(
            &[frame],
            &net,
            &lstm,
            5,
            PipelineMode::Overlap,
            &ForwardOptions::default()
        )
        .is_err());
    }

    #[test]
    fn repeated_frame_outputs_converge() {
        let frame = smooth_frame(32, 6);
        let frames = vec![frame; 5];
        let net = generate_network(5, &[3, 4], 2, 3).unwrap();
        let lstm = generate_convlstm(1, 2).unwrap();
        let outs = forward_temporal(
            &frames,
            &net,
            &lstm,
            5,
            PipelineMode::CubePad,
            &ForwardOptions::default(),
        )
        .unwrap();
        let mut deltas = Vec::new();
        for t in 1..outs.len() {
            let d: f64 = outs[t]
                .tensor()
                .data()
                .iter()
                .zip(outs[t - 1].tensor().data())
                .map(|(a, b)| (a - b).abs() as f64)
                .sum::<f64>()
                / outs[t].tensor().len() as f64;
            deltas.push(d);
        }
        for t in 2..deltas.len() {
            assert!(
                deltas[t] <= deltas[t - 1] + 1e-6,
                "deltas not non-increasing: {deltas:?}"
            );
        }
    }

    #[test]
    fn seam_blob_cp_beats_zp() {
        // bright blob straddling the front/right edge at lon = 45 degrees,
        // plus a face-center blob so the normalization anchor lies away
        // from the seam
        let p = 128usize;
        let q = p / 2;
        let mut data = vec![0.05f32; 3 * q * p];
        let blob_lon = std::f64::consts::FRAC_PI_4;
        for ch in 0..3 {
            for y in 0..q {
                let lat = (0.5 - (y as f64 + 0.5) / q as f64) * std::f64::consts::PI;
                for x in 0..p {
                    let lon = ((x as f64 + 0.5) / p as f64 - 0.5) * std::f64::consts::TAU;
                    let d = crate::sphere::SphericalDirection::from_angles(lon, lat);
                    let seam = crate::sphere::SphericalDirection::from_angles(blob_lon, 0.0);
                    let center = crate::sphere::SphericalDirection::from_angles(0.0, 0.0);
                    let a1 = d.dot(seam).clamp(-1.0, 1.0).acos();
                    let a2 = d.dot(center).clamp(-1.0, 1.0).acos();
                    let v = 0.05
                        + 0.95 * (-a1 * a1 / (2.0 * 0.10f64.powi(2))).exp()
                        + 0.95 * (-a2 * a2 / (2.0 * 0.10f64.powi(2))).exp();
                    data[(ch * q + y) * p + x] = (v as f32).min(1.0);
                }
            }
        }
        let frame = EquirectMap::from_parts(3, q, p, data).unwrap();
        let net = generate_network(2, &[3, 6], 3, 3).unwrap();
        let opts = ForwardOptions::default();
        let cp = forward_static(&frame, &net, PipelineMode::CubePad, &opts).unwrap();
        let zp = forward_static(&frame, &net, PipelineMode::ZeroPad, &opts).unwrap();
        let seam_col = (p as f64 * (blob_lon / std::f64::consts::TAU + 0.5)) as usize;
        let col_max = |m: &EquirectMap| -> f32 {
            (0..q).map(|y| m.get(0, y, seam_col)).fold(f32::MIN, f32::max)
        };
        let (mc, mz) = (col_max(&cp), col_max(&zp));
        assert!(mc >= mz, "cp seam response {mc} < zp {mz}");
        // the comparison is non-vacuous: the seam statistic separates modes
        assert!(mc - mz > 0.05, "fixture no longer discriminates: {mc} vs {mz}");
    }

    #[test]
    fn equivariance_under_yaw90_with_symmetric_kernels() {
        // isotropic kernels commute with the in-plane rotations of the polar
        // faces, so the cube-padded stack must commute with the yaw
        // permutation
        let w = 16usize;
        let frame = smooth_frame(4 * w, 8);
        let cube = equirect_to_cubemap(&frame, w).unwrap();

        let sym_kernel = |a: f32, b: f32, c: f32| vec![a, b, a, b, c, b, a, b, a];
        let mut kdata = Vec::new();
        for _ in 0..(2 * 3) {
            kdata.extend(sym_kernel(0.1, 0.2, 0.5));
        }
        let layer = ConvLayer::new(
            Tensor::new(vec![2, 3, 3, 3], kdata).unwrap(),
            Tensor::new(vec![2], vec![0.05, -0.02]).unwrap(),
            1,
            PadMode::CubePad,
            Activation::Relu,
        )
        .unwrap();
        let mut k2 = Vec::new();
        for _ in 0..(2 * 2) {
            k2.extend(sym_kernel(-0.15, 0.3, 0.4));
        }
        let layer2 = ConvLayer::new(
            Tensor::new(vec![2, 2, 3, 3], k2).unwrap(),
            Tensor::new(vec![2], vec![0.0, 0.1]).unwrap(),
            1,
            PadMode::CubePad,
            Activation::None,
        )
        .unwrap();

        let stack = |x: &CubeMap| -> CubeMap {
            let a = crate::nn::conv2d(x, &layer).unwrap();
            crate::nn::conv2d(&a, &layer2).unwrap()
        };
        let rotated_then_conv = stack(&crate::sphere::yaw90_cubemap(&cube));
        let conv_then_rotated = crate::sphere::yaw90_cubemap(&stack(&cube));
        for (a, b) in rotated_then_conv
            .tensor()
            .data()
            .iter()
            .zip(conv_then_rotated.tensor().data())
        {
            assert!((a - b).abs() <= 1e-5, "{a} vs {b}");
        }
    }
}
