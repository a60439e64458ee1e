//! Dense f32 tensors, the equirectangular/cubemap wrappers, and `CPT1` file
//! I/O.
//!
//! `CPT1` format (little-endian):
//! - magic: 4 bytes `"CPT1"`
//! - ndim: u32 (1..=8)
//! - dims: ndim * u32, each >= 1
//! - data: product(dims) * f32
//!
//! No trailing bytes are allowed and non-finite payloads are rejected, so a
//! file that parses is always a usable tensor.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CPT1";
const MAX_NDIM: usize = 8;

/// Row-major dense f32 tensor; the last dimension varies fastest.
///
/// Tensors are immutable after construction as far as the public API is
/// concerned; every operation in this crate builds a fresh output.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_NDIM {
            return Err(Error::Shape(format!(
                "tensor rank must be 1..={MAX_NDIM}, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::Shape(format!("zero-sized dimension in {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} imply {len} elements, got {}",
                data.len()
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Tensor::full(dims, 0.0)
    }

    pub fn full(dims: &[usize], value: f32) -> Self {
        let len = dims.iter().product();
        Tensor {
            dims: dims.to_vec(),
            data: vec![value; len],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Largest |value|; 0 for the hypothetical empty tensor.
    pub fn max_abs(&self) -> f32 {
        self.data.iter().fold(0.0f32, |m, &v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Reads a `CPT1` file, rejecting trailing bytes and non-finite floats.
    pub fn read_from(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_cpt_bytes(&bytes).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Writes the `CPT1` encoding of the tensor.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let bytes = self.to_cpt_bytes()?;
        fs::write(path, bytes)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
    }

    pub fn from_cpt_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::Format("file shorter than CPT1 header".into()));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected \"CPT1\"",
                &bytes[0..4]
            )));
        }
        let ndim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        if ndim == 0 || ndim > MAX_NDIM {
            return Err(Error::Format(format!("unsupported rank {ndim}")));
        }
        let dims_end = 8 + 4 * ndim;
        if bytes.len() < dims_end {
            return Err(Error::Format("truncated dimension list".into()));
        }
        let mut dims = Vec::with_capacity(ndim);
        let mut len: u64 = 1;
        for i in 0..ndim {
            let d = u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
            if d == 0 {
                return Err(Error::Format("zero-sized dimension".into()));
            }
            len = len.saturating_mul(d as u64);
            dims.push(d);
        }
        let expected = dims_end as u64 + 4 * len;
        if (bytes.len() as u64) != expected {
            return Err(Error::Format(format!(
                "payload is {} bytes, dims {dims:?} require {expected}",
                bytes.len()
            )));
        }
        let mut data = Vec::with_capacity(len as usize);
        for chunk in bytes[dims_end..].chunks_exact(4) {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::Data(format!("non-finite value {v}")));
            }
            data.push(v);
        }
        Ok(Tensor { dims, data })
    }

    pub fn to_cpt_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(8 + 4 * self.dims.len() + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            if d > u32::MAX as usize {
                return Err(Error::Format(format!("dimension {d} exceeds u32")));
            }
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &self.data {
            if !v.is_finite() {
                return Err(Error::Data(format!("refusing to write non-finite value {v}")));
            }
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }
}

/// Single spherical frame in equirectangular layout, dims `[c, q, p]`.
///
/// Longitude wraps: column 0 and column p-1 are adjacent on the sphere.
/// Canonical full-sphere maps have `p = 2q`; that is checked by the pipeline
/// operations that require it, not by the type itself.
#[derive(Debug, Clone, PartialEq)]
pub struct EquirectMap {
    tensor: Tensor,
}

impl EquirectMap {
    pub fn new(tensor: Tensor) -> Result<Self> {
        let d = tensor.dims();
        if d.len() != 3 {
            return Err(Error::Shape(format!(
                "equirect map needs dims [c, q, p], got {d:?}"
            )));
        }
        if d[2] < 2 || d[1] < 1 {
            return Err(Error::Shape(format!(
                "equirect map needs p >= 2 and q >= 1, got q={} p={}",
                d[1], d[2]
            )));
        }
        Ok(EquirectMap { tensor })
    }

    pub fn from_parts(c: usize, q: usize, p: usize, data: Vec<f32>) -> Result<Self> {
        EquirectMap::new(Tensor::new(vec![c, q, p], data)?)
    }

    pub fn zeros(c: usize, q: usize, p: usize) -> Result<Self> {
        EquirectMap::new(Tensor::new(vec![c, q, p], vec![0.0; c * q * p])?)
    }

    pub fn channels(&self) -> usize {
        self.tensor.dims()[0]
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

    pub(crate) fn tensor_mut(&mut self) -> &mut Tensor {
        &mut self.tensor
    }

    pub fn into_tensor(self) -> Tensor {
        self.tensor
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let (q, p) = (self.height(), self.width());
        &self.tensor.data()[c * q * p..(c + 1) * q * p]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let (q, p) = (self.height(), self.width());
        &mut self.tensor.data_mut()[c * q * p..(c + 1) * q * p]
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.plane(c)[y * self.width() + x]
    }

    /// Bilinear sample with horizontal wrap and vertical clamp; `x`/`y` are
    /// texel-center coordinates (integers hit texels exactly).
    pub fn sample_wrap(&self, c: usize, x: f64, y: f64) -> f32 {
        sample_plane_wrap(self.plane(c), self.height(), self.width(), x, y)
    }
}

/// The face order of every cubemap in this crate, alphabetical and immutable.
pub const FACE_COUNT: usize = 6;

/// Six-face stack, dims `[6, c, w, w]`; face order Back, Down, Front, Left,
/// Right, Top.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeMap {
    tensor: Tensor,
}

impl CubeMap {
    pub fn new(tensor: Tensor) -> Result<Self> {
        let d = tensor.dims();
        if d.len() != 4 {
            return Err(Error::Shape(format!(
                "cubemap needs dims [6, c, w, w], got {d:?}"
            )));
        }
        if d[0] != FACE_COUNT {
            return Err(Error::Shape(format!("cubemap needs 6 faces, got {}", d[0])));
        }
        if d[2] != d[3] {
            return Err(Error::Shape(format!(
                "cubemap faces must be square, got {}x{}",
                d[2], d[3]
            )));
        }
        Ok(CubeMap { tensor })
    }

    pub fn from_parts(c: usize, w: usize, data: Vec<f32>) -> Result<Self> {
        CubeMap::new(Tensor::new(vec![FACE_COUNT, c, w, w], data)?)
    }

    pub fn zeros(c: usize, w: usize) -> Result<Self> {
        CubeMap::from_parts(c, w, vec![0.0; FACE_COUNT * c * w * w])
    }

    pub fn channels(&self) -> usize {
        self.tensor.dims()[1]
    }

    pub fn width(&self) -> usize {
        self.tensor.dims()[2]
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor {
        self.tensor
    }

    pub fn face_plane(&self, face: usize, c: usize) -> &[f32] {
        let (nc, w) = (self.channels(), self.width());
        let base = (face * nc + c) * w * w;
        &self.tensor.data()[base..base + w * w]
    }

    pub fn face_plane_mut(&mut self, face: usize, c: usize) -> &mut [f32] {
        let (nc, w) = (self.channels(), self.width());
        let base = (face * nc + c) * w * w;
        &mut self.tensor.data_mut()[base..base + w * w]
    }

    pub fn get(&self, face: usize, c: usize, y: usize, x: usize) -> f32 {
        self.face_plane(face, c)[y * self.width() + x]
    }
}

/// `a + t*(b - a)`: exact at t = 0 and for a == b, which keeps constant
/// inputs constant through every resampling path in the crate.
#[inline]
pub(crate) fn lerp(a: f32, b: f32, t: f32) -> f32 {
    a + t * (b - a)
}

/// Bilinear sample of a q*p plane with horizontal wrap and vertical clamp.
pub(crate) fn sample_plane_wrap(plane: &[f32], q: usize, p: usize, x: f64, y: f64) -> f32 {
    let x0f = x.floor();
    let y0f = y.floor();
    let fx = (x - x0f) as f32;
    let fy = (y - y0f) as f32;
    let x0 = wrap_index(x0f as i64, p);
    let x1 = wrap_index(x0f as i64 + 1, p);
    let y0 = clamp_index(y0f as i64, q);
    let y1 = clamp_index(y0f as i64 + 1, q);
    let top = lerp(plane[y0 * p + x0], plane[y0 * p + x1], fx);
    let bot = lerp(plane[y1 * p + x0], plane[y1 * p + x1], fx);
    lerp(top, bot, fy)
}

/// Bilinear sample of an h*w plane with clamp on both axes.
pub(crate) fn sample_plane_clamp(plane: &[f32], h: usize, w: usize, x: f64, y: f64) -> f32 {
    let x0f = x.floor();
    let y0f = y.floor();
    let fx = (x - x0f) as f32;
    let fy = (y - y0f) as f32;
    let x0 = clamp_index(x0f as i64, w);
    let x1 = clamp_index(x0f as i64 + 1, w);
    let y0 = clamp_index(y0f as i64, h);
    let y1 = clamp_index(y0f as i64 + 1, h);
    let top = lerp(plane[y0 * w + x0], plane[y0 * w + x1], fx);
    let bot = lerp(plane[y1 * w + x0], plane[y1 * w + x1], fx);
    lerp(top, bot, fy)
}

#[inline]
pub(crate) fn wrap_index(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

#[inline]
pub(crate) fn clamp_index(i: i64, n: usize) -> usize {
    i.clamp(0, n as i64 - 1) as usize
}
