//! Spherical geometry: equirectangular <-> cubemap projections, gnomonic
//! NFoV rendering, and whole-sphere rotation.
//!
//! World frame: x points at the front face center, y to the right of front,
//! z up. Face texel centers sit at u = (2i+1)/w - 1, so every resampling
//! path here shares the same half-texel grid convention and the 90-degree
//! NFoV render of a face reproduces the projection exactly.

use crate::error::{Error, Result};
use crate::tensor::{
    clamp_index, sample_plane_clamp, sample_plane_wrap, wrap_index, CubeMap, EquirectMap, Tensor,
    FACE_COUNT,
};

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Cube face identifiers in the fixed stack order (alphabetical).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceId {
    Back,
    Down,
    Front,
    Left,
    Right,
    Top,
}

impl FaceId {
    pub const ALL: [FaceId; FACE_COUNT] = [
        FaceId::Back,
        FaceId::Down,
        FaceId::Front,
        FaceId::Left,
        FaceId::Right,
        FaceId::Top,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        FaceId::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::Argument(format!("face index {i} out of range")))
    }

    pub fn letter(self) -> char {
        match self {
            FaceId::Back => 'B',
            FaceId::Down => 'D',
            FaceId::Front => 'F',
            FaceId::Left => 'L',
            FaceId::Right => 'R',
            FaceId::Top => 'T',
        }
    }

    /// Outward face normal.
    pub fn normal(self) -> [f64; 3] {
        FACE_AXES[self.index()].0
    }

    /// Unit vector along increasing face column index.
    pub fn axis_u(self) -> [f64; 3] {
        FACE_AXES[self.index()].1
    }

    /// Unit vector along increasing face row index.
    pub fn axis_v(self) -> [f64; 3] {
        FACE_AXES[self.index()].2
    }
}

/// (normal, u-axis, v-axis) per face, in stack order B, D, F, L, R, T.
/// The four equatorial faces chain left-to-right with no edge reversal.
const FACE_AXES: [([f64; 3], [f64; 3], [f64; 3]); FACE_COUNT] = [
    ([-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]), // Back
    ([0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]),  // Down
    ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]),   // Front
    ([0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]),  // Left
    ([0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]),  // Right
    ([0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]),    // Top
];

/// Unit direction on the viewing sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    v: [f64; 3],
}

impl SphericalDirection {
    /// Normalizes the given vector; rejects vectors too short to orient.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if n < 1e-12 {
            return Err(Error::Argument("cannot normalize near-zero vector".into()));
        }
        Ok(SphericalDirection {
            v: [x / n, y / n, z / n],
        })
    }

    pub fn from_angles(lon: f64, lat: f64) -> Self {
        let (sin_lat, cos_lat) = lat.sin_cos();
        let (sin_lon, cos_lon) = lon.sin_cos();
        SphericalDirection {
            v: [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat],
        }
    }

    pub fn x(self) -> f64 {
        self.v[0]
    }

    pub fn y(self) -> f64 {
        self.v[1]
    }

    pub fn z(self) -> f64 {
        self.v[2]
    }

    pub fn as_array(self) -> [f64; 3] {
        self.v
    }

    /// Longitude in [-pi, pi], latitude in [-pi/2, pi/2].
    pub fn to_angles(self) -> (f64, f64) {
        (
            self.v[1].atan2(self.v[0]),
            self.v[2].clamp(-1.0, 1.0).asin(),
        )
    }

    pub fn dot(self, other: SphericalDirection) -> f64 {
        dot(self.v, other.v)
    }
}

/// Rectilinear viewport description: center angles, field of view, output
/// size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NFovSpec {
    pub lon: f64,
    pub lat: f64,
    pub fov_x: f64,
    pub fov_y: f64,
    pub width: usize,
    pub height: usize,
}

impl NFovSpec {
    pub fn new(lon: f64, lat: f64, fov_x: f64, fov_y: f64, width: usize, height: usize) -> Result<Self> {
        if !(fov_x > 0.0 && fov_x < PI && fov_y > 0.0 && fov_y < PI) {
            return Err(Error::Argument(format!(
                "field of view must lie in (0, pi), got ({fov_x}, {fov_y})"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::Argument("viewport size must be positive".into()));
        }
        if !(-PI..PI).contains(&lon) || !(-PI / 2.0..=PI / 2.0).contains(&lat) {
            return Err(Error::Argument(format!(
                "viewport center ({lon}, {lat}) outside [-pi, pi) x [-pi/2, pi/2]"
            )));
        }
        Ok(NFovSpec {
            lon,
            lat,
            fov_x,
            fov_y,
            width,
            height,
        })
    }

    pub fn square(lon: f64, lat: f64, fov: f64, size: usize) -> Result<Self> {
        NFovSpec::new(lon, lat, fov, fov, size, size)
    }
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn face_dir_raw(face: FaceId, u: f64, v: f64) -> [f64; 3] {
    let (n, au, av) = FACE_AXES[face.index()];
    [
        n[0] + u * au[0] + v * av[0],
        n[1] + u * au[1] + v * av[1],
        n[2] + u * au[2] + v * av[2],
    ]
}

/// Direction of the face point at tangent coordinates (u, v) in [-1, 1]^2.
pub fn face_direction(face: FaceId, u: f64, v: f64) -> Result<SphericalDirection> {
    if !(-1.0..=1.0).contains(&u) || !(-1.0..=1.0).contains(&v) {
        return Err(Error::Argument(format!(
            "face coordinates ({u}, {v}) outside [-1, 1]"
        )));
    }
    let d = face_dir_raw(face, u, v);
    SphericalDirection::new(d[0], d[1], d[2])
}

/// Continuous equirect pixel coordinate of a direction; x in [-0.5, p-0.5]
/// (wraps), y in [-0.5, q-0.5].
pub fn dir_to_equirect(d: SphericalDirection, p: usize, q: usize) -> (f64, f64) {
    let (lon, lat) = d.to_angles();
    let x = (lon / TAU + 0.5) * p as f64 - 0.5;
    let y = (0.5 - lat / PI) * q as f64 - 0.5;
    (x, y)
}

/// Texel-center tangent coordinate (2i+1)/w - 1.
#[inline]
pub(crate) fn texel_coord(i: usize, w: usize) -> f64 {
    (2 * i + 1) as f64 / w as f64 - 1.0
}

/// Projects an equirectangular map onto the six cube faces at width `w`.
pub fn equirect_to_cubemap(m: &EquirectMap, w: usize) -> Result<CubeMap> {
    if w < 2 {
        return Err(Error::Argument(format!("face width must be >= 2, got {w}")));
    }
    let (c, q, p) = (m.channels(), m.height(), m.width());
    let mut out = CubeMap::zeros(c, w)?;
    for face in FaceId::ALL {
        let f = face.index();
        for j in 0..w {
            let v = texel_coord(j, w);
            for i in 0..w {
                let u = texel_coord(i, w);
                let d = face_dir_raw(face, u, v);
                let dir = SphericalDirection::new(d[0], d[1], d[2])
                    .expect("face directions are never zero");
                let (x, y) = dir_to_equirect(dir, p, q);
                for ch in 0..c {
                    let val = sample_plane_wrap(m.plane(ch), q, p, x, y);
                    out.face_plane_mut(f, ch)[j * w + i] = val;
                }
            }
        }
    }
    Ok(out)
}

/// Renders a cubemap back onto an equirectangular grid of size `q x p`.
///
/// Each output texel picks the face whose normal is most aligned with its
/// direction and samples that face bilinearly, clamped at the face border.
pub fn cubemap_to_equirect(cm: &CubeMap, p: usize, q: usize) -> Result<EquirectMap> {
    if p != 2 * q {
        return Err(Error::Argument(format!(
            "canonical equirect output needs p = 2q, got p={p} q={q}"
        )));
    }
    let (c, w) = (cm.channels(), cm.width());
    let mut out = EquirectMap::zeros(c, q, p)?;
    // longitude depends only on the column and latitude only on the row, so
    // the trig hoists out of the pixel loop
    let lon_trig: Vec<(f64, f64)> = (0..p)
        .map(|x| (((x as f64 + 0.5) / p as f64 - 0.5) * TAU).sin_cos())
        .collect();
    for y in 0..q {
        let lat = (0.5 - (y as f64 + 0.5) / q as f64) * PI;
        let (sin_lat, cos_lat) = lat.sin_cos();
        for (x, &(sin_lon, cos_lon)) in lon_trig.iter().enumerate() {
            let d = [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat];
            let (face, fx, fy) = direction_to_face(d, w);
            for ch in 0..c {
                let val = sample_plane_clamp(cm.face_plane(face.index(), ch), w, w, fx, fy);
                out.plane_mut(ch)[y * p + x] = val;
            }
        }
    }
    Ok(out)
}

/// Face selection plus face-pixel coordinates for a world direction.
///
/// The face normals are signed unit axes, so the argmax over normal dots
/// reduces to picking the dominant signed component (first face in stack
/// order wins ties, matching a plain argmax over [`FaceId::ALL`]).
fn direction_to_face(d: [f64; 3], w: usize) -> (FaceId, f64, f64) {
    let dots = [-d[0], -d[2], d[0], -d[1], d[1], d[2]];
    let mut best = 0usize;
    for i in 1..FACE_COUNT {
        if dots[i] > dots[best] {
            best = i;
        }
    }
    let face = FaceId::ALL[best];
    let best_dot = dots[best];
    let u = dot(d, face.axis_u()) / best_dot;
    let v = dot(d, face.axis_v()) / best_dot;
    let fx = (u + 1.0) * w as f64 / 2.0 - 0.5;
    let fy = (v + 1.0) * w as f64 / 2.0 - 0.5;
    (face, fx, fy)
}

/// Camera frame of a gnomonic viewport: forward, right (east-aligned) and,
/// image-down directions for a center at (lon, lat).
pub(crate) fn viewport_frame(lon: f64, lat: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    let forward = [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat];
    let right = [-sin_lon, cos_lon, 0.0];
    let down = [sin_lat * cos_lon, sin_lat * sin_lon, -cos_lat];
    (forward, right, down)
}

/// Gnomonic (rectilinear) render of a viewport from an equirectangular map.
pub fn render_nfov(m: &EquirectMap, spec: &NFovSpec) -> Result<Tensor> {
    let (c, q, p) = (m.channels(), m.height(), m.width());
    let (fwd, right, down) = viewport_frame(spec.lon, spec.lat);
    let half_u = (spec.fov_x / 2.0).tan();
    let half_v = (spec.fov_y / 2.0).tan();
    let (ow, oh) = (spec.width, spec.height);
    let mut out = Tensor::zeros(&[c, oh, ow]);
    for j in 0..oh {
        let tv = half_v * texel_coord(j, oh);
        for i in 0..ow {
            let tu = half_u * texel_coord(i, ow);
            let d = [
                fwd[0] + tu * right[0] + tv * down[0],
                fwd[1] + tu * right[1] + tv * down[1],
                fwd[2] + tu * right[2] + tv * down[2],
            ];
            let dir = SphericalDirection::new(d[0], d[1], d[2])
                .expect("viewport directions are never zero");
            let (x, y) = dir_to_equirect(dir, p, q);
            for ch in 0..c {
                out.data_mut()[(ch * oh + j) * ow + i] = sample_plane_wrap(m.plane(ch), q, p, x, y);
            }
        }
    }
    Ok(out)
}

fn mat_mul_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        }
    }
    out
}

fn transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = m[c][r];
        }
    }
    out
}

/// Composite rotation Rz(yaw) * Ry(pitch) * Rx(roll).
pub fn rotation_matrix(yaw: f64, pitch: f64, roll: f64) -> [[f64; 3]; 3] {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sr, cr) = roll.sin_cos();
    let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
    let rx = [[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]];
    mat_mul(&mat_mul(&rz, &ry), &rx)
}

/// Rotates the whole sphere: the output at direction d samples the input at
/// R^-1 d with R = Rz(yaw)*Ry(pitch)*Rx(roll).
///
/// A pure yaw that lands on an integer number of columns is applied as an
/// exact column roll, so those rotations are permutations with no
/// resampling.
pub fn rotate_sphere(m: &EquirectMap, yaw: f64, pitch: f64, roll: f64) -> Result<EquirectMap> {
    let (c, q, p) = (m.channels(), m.height(), m.width());

    if pitch == 0.0 && roll == 0.0 {
        let shift = yaw * p as f64 / TAU;
        let rounded = shift.round();
        if (shift - rounded).abs() < 1e-9 {
            let k = wrap_index(rounded as i64, p);
            let mut out = EquirectMap::zeros(c, q, p)?;
            for ch in 0..c {
                let src = m.plane(ch);
                let dst = out.plane_mut(ch);
                for y in 0..q {
                    for x in 0..p {
                        // out[x] looks where the inverse rotation points: x - k
                        dst[y * p + x] = src[y * p + (x + p - k) % p];
                    }
                }
            }
            return Ok(out);
        }
    }

    let r_inv = transpose(&rotation_matrix(yaw, pitch, roll));
    let mut out = EquirectMap::zeros(c, q, p)?;
    for y in 0..q {
        let lat = (0.5 - (y as f64 + 0.5) / q as f64) * PI;
        let (sin_lat, cos_lat) = lat.sin_cos();
        for x in 0..p {
            let lon = ((x as f64 + 0.5) / p as f64 - 0.5) * TAU;
            let (sin_lon, cos_lon) = lon.sin_cos();
            let d = [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat];
            let s = mat_mul_vec(&r_inv, d);
            let dir = SphericalDirection::new(s[0], s[1], s[2]).expect("rotated unit vector");
            let (sx, sy) = dir_to_equirect(dir, p, q);
            for ch in 0..c {
                out.plane_mut(ch)[y * p + x] = sample_plane_wrap(m.plane(ch), q, p, sx, sy);
            }
        }
    }
    Ok(out)
}

/// Cubemap counterpart of a +90-degree yaw: equatorial faces permute
/// (front <- left <- back <- right <- front) and the polar faces rotate
/// in-plane by 90 degrees. Bitwise-equal to projecting the rotated sphere
/// when p is divisible by 4.
pub fn yaw90_cubemap(cm: &CubeMap) -> CubeMap {
    let (c, w) = (cm.channels(), cm.width());
    let mut out = CubeMap::zeros(c, w).expect("same shape");
    let copy_face = |out: &mut CubeMap, dst: FaceId, src: FaceId| {
        for ch in 0..c {
            let s = cm.face_plane(src.index(), ch).to_vec();
            out.face_plane_mut(dst.index(), ch).copy_from_slice(&s);
        }
    };
    copy_face(&mut out, FaceId::Front, FaceId::Left);
    copy_face(&mut out, FaceId::Right, FaceId::Front);
    copy_face(&mut out, FaceId::Back, FaceId::Right);
    copy_face(&mut out, FaceId::Left, FaceId::Back);
    for ch in 0..c {
        let top = cm.face_plane(FaceId::Top.index(), ch);
        let down = cm.face_plane(FaceId::Down.index(), ch);
        for j in 0..w {
            for i in 0..w {
                // top: (i', j') = (w-1-j, i); down: (i', j') = (j, w-1-i)
                let t = top[i * w + (w - 1 - j)];
                out.face_plane_mut(FaceId::Top.index(), ch)[j * w + i] = t;
                let d = down[(w - 1 - i) * w + j];
                out.face_plane_mut(FaceId::Down.index(), ch)[j * w + i] = d;
            }
        }
    }
    out
}

/// Mean-square-error based peak signal-to-noise ratio for unit-range data.
pub fn psnr(a: &EquirectMap, b: &EquirectMap) -> Result<f64> {
    if a.tensor().dims() != b.tensor().dims() {
        return Err(Error::Shape(format!(
            "psnr needs matching dims, got {:?} vs {:?}",
            a.tensor().dims(),
            b.tensor().dims()
        )));
    }
    let mut acc = 0.0f64;
    for (x, y) in a.tensor().data().iter().zip(b.tensor().data()) {
        let d = (*x - *y) as f64;
        acc += d * d;
    }
    let mse = acc / a.tensor().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * mse.log10())
}

#[allow(dead_code)]
pub(crate) fn clamp_to_face(x: f64, w: usize) -> usize {
    clamp_index(x.round() as i64, w)
}
