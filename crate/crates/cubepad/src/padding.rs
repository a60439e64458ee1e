//! Cube padding and its baselines.
//!
//! The adjacency table is derived mechanically from the face axes: for each
//! (face, side) the neighbor is the unique (face, side) whose boundary
//! sweep coincides pointwise, possibly with reversed parameterization. Cube
//! padding then fills each pad band with an exact copy of the neighbor's
//! innermost boundary lines, orientation-corrected per the table.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::sphere::{face_dir_raw, texel_coord, FaceId};
use crate::tensor::{sample_plane_wrap, CubeMap, EquirectMap, Tensor, FACE_COUNT};

/// Side of a face image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Top, Side::Bottom, Side::Left, Side::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Boundary sweep direction at parameter t in [-1, 1]; t runs along u
    /// for horizontal sides and along v for vertical sides.
    fn boundary_dir(self, face: FaceId, t: f64) -> [f64; 3] {
        match self {
            Side::Top => face_dir_raw(face, t, -1.0),
            Side::Bottom => face_dir_raw(face, t, 1.0),
            Side::Left => face_dir_raw(face, -1.0, t),
            Side::Right => face_dir_raw(face, 1.0, t),
        }
    }
}

/// One edge pairing: (face, side) meets (neighbor, neighbor_side); when
/// `reversed` the two boundary parameterizations run opposite ways.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdjacencyEntry {
    pub face: FaceId,
    pub side: Side,
    pub neighbor: FaceId,
    pub neighbor_side: Side,
    pub reversed: bool,
}

/// The 24 (face, side) pairings driving cube padding.
#[derive(Debug, Clone)]
pub struct AdjacencyTable {
    entries: [[AdjacencyEntry; 4]; FACE_COUNT],
}

impl AdjacencyTable {
    /// Derives the table from the face axes; fails with an internal error if
    /// any boundary has no or multiple matches (an axis-table bug).
    pub fn derive() -> Result<AdjacencyTable> {
        let samples = [-0.73, 0.11, 0.58];
        let mut entries = Vec::with_capacity(24);
        for face in FaceId::ALL {
            for side in Side::ALL {
                let mut found: Option<(FaceId, Side, bool)> = None;
                for nb in FaceId::ALL {
                    if nb == face {
                        continue;
                    }
                    for nb_side in Side::ALL {
                        for &reversed in &[false, true] {
                            let ok = samples.iter().all(|&t| {
                                let a = side.boundary_dir(face, t);
                                let tb = if reversed { -t } else { t };
                                let b = nb_side.boundary_dir(nb, tb);
                                a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9)
                            });
                            if ok {
                                if found.is_some() {
                                    return Err(Error::Internal(format!(
                                        "multiple adjacency matches for ({face:?}, {side:?})"
                                    )));
                                }
                                found = Some((nb, nb_side, reversed));
                            }
                        }
                    }
                }
                let (neighbor, neighbor_side, reversed) = found.ok_or_else(|| {
                    Error::Internal(format!("no adjacency match for ({face:?}, {side:?})"))
                })?;
                entries.push(AdjacencyEntry {
                    face,
                    side,
                    neighbor,
                    neighbor_side,
                    reversed,
                });
            }
        }
        let mut table = [[entries[0]; 4]; FACE_COUNT];
        for e in entries {
            table[e.face.index()][e.side.index()] = e;
        }
        let t = AdjacencyTable { entries: table };
        t.check_involution()?;
        Ok(t)
    }

    /// Derived once and shared; panics only on a broken axis table.
    pub fn global() -> &'static AdjacencyTable {
        static TABLE: OnceLock<AdjacencyTable> = OnceLock::new();
        TABLE.get_or_init(|| AdjacencyTable::derive().expect("face axis table is consistent"))
    }

    pub fn lookup(&self, face: FaceId, side: Side) -> AdjacencyEntry {
        self.entries[face.index()][side.index()]
    }

    pub fn entries(&self) -> impl Iterator<Item = AdjacencyEntry> + '_ {
        self.entries.iter().flatten().copied()
    }

    fn check_involution(&self) -> Result<()> {
        for e in self.entries() {
            let back = self.lookup(e.neighbor, e.neighbor_side);
            if back.neighbor != e.face || back.neighbor_side != e.side || back.reversed != e.reversed
            {
                return Err(Error::Internal(format!(
                    "adjacency not symmetric at ({:?}, {:?})",
                    e.face, e.side
                )));
            }
        }
        Ok(())
    }
}

/// How the k*k corner blocks of a padded face are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CornerFill {
    /// Average of the two adjacent pad bands' corner-adjacent blocks; keeps
    /// constant inputs exactly constant.
    #[default]
    Average,
    Zero,
}

/// Face stack padded by `k` texels on every side; the interior is a bitwise
/// copy of the source cubemap.
#[derive(Debug, Clone)]
pub struct PaddedCubeMap {
    pub k: usize,
    pub corner_fill: CornerFill,
    tensor: Tensor,
}

impl PaddedCubeMap {
    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn padded_width(&self) -> usize {
        self.tensor.dims()[2]
    }

    pub fn channels(&self) -> usize {
        self.tensor.dims()[1]
    }

    pub fn face_plane(&self, face: usize, c: usize) -> &[f32] {
        let (nc, w) = (self.channels(), self.padded_width());
        let base = (face * nc + c) * w * w;
        &self.tensor.data()[base..base + w * w]
    }

    /// Crops the padding away again.
    pub fn interior(&self) -> CubeMap {
        let k = self.k;
        let wp = self.padded_width();
        let w = wp - 2 * k;
        let c = self.channels();
        let mut data = Vec::with_capacity(FACE_COUNT * c * w * w);
        for f in 0..FACE_COUNT {
            for ch in 0..c {
                let plane = self.face_plane(f, ch);
                for j in 0..w {
                    let row = &plane[(j + k) * wp + k..(j + k) * wp + k + w];
                    data.extend_from_slice(row);
                }
            }
        }
        CubeMap::from_parts(c, w, data).expect("interior shape is valid")
    }
}

/// Row/col index of the m-th innermost boundary line of a side.
#[inline]
fn boundary_line(side: Side, m: usize, w: usize) -> usize {
    match side {
        Side::Top | Side::Left => m,
        Side::Bottom | Side::Right => w - 1 - m,
    }
}

/// Reads texel `t` along the m-th boundary line of `side` on a w*w plane.
#[inline]
fn boundary_texel(plane: &[f32], side: Side, m: usize, t: usize, w: usize) -> f32 {
    let line = boundary_line(side, m, w);
    match side {
        Side::Top | Side::Bottom => plane[line * w + t],
        Side::Left | Side::Right => plane[t * w + line],
    }
}

/// Cube padding into a preallocated (w+2k)^2 plane whose interior is
/// already filled. `stack` is the raw [6, c, w, w] source; used by both the
/// public op and the conv layers.
#[allow(clippy::too_many_arguments)]
pub(crate) fn cube_pad_plane(
    stack: &[f32],
    c: usize,
    w: usize,
    face: usize,
    ch: usize,
    k: usize,
    corner: CornerFill,
    dst: &mut [f32],
) {
    let wp = w + 2 * k;
    let table = AdjacencyTable::global();
    let face_id = FaceId::ALL[face];

    for side in Side::ALL {
        let entry = table.lookup(face_id, side);
        let nb = entry.neighbor.index();
        let nb_plane = &stack[(nb * c + ch) * w * w..(nb * c + ch + 1) * w * w];
        for m in 0..k {
            for t in 0..w {
                let tn = if entry.reversed { w - 1 - t } else { t };
                let v = boundary_texel(nb_plane, entry.neighbor_side, m, tn, w);
                let (row, col) = match side {
                    Side::Top => (k - 1 - m, k + t),
                    Side::Bottom => (k + w + m, k + t),
                    Side::Left => (k + t, k - 1 - m),
                    Side::Right => (k + t, k + w + m),
                };
                dst[row * wp + col] = v;
            }
        }
    }

    match corner {
        CornerFill::Zero => {
            for (r0, c0) in [(0, 0), (0, k + w), (k + w, 0), (k + w, k + w)] {
                for r in r0..r0 + k {
                    dst[r * wp + c0..r * wp + c0 + k].fill(0.0);
                }
            }
        }
        CornerFill::Average => {
            // corner texel = mean of the horizontally and vertically adjacent
            // pad-band blocks
            for (r0, c0, dr, dc) in [
                (0usize, 0usize, k as i64, k as i64),
                (0, k + w, k as i64, -(k as i64)),
                (k + w, 0, -(k as i64), k as i64),
                (k + w, k + w, -(k as i64), -(k as i64)),
            ] {
                for r in 0..k {
                    for c in 0..k {
                        let row = r0 + r;
                        let col = c0 + c;
                        let from_side = dst[row * wp + (col as i64 + dc) as usize];
                        let from_band = dst[((row as i64 + dr) as usize) * wp + col];
                        dst[row * wp + col] = 0.5 * (from_side + from_band);
                    }
                }
            }
        }
    }
}

pub(crate) fn fill_interior(src_plane: &[f32], w: usize, k: usize, dst: &mut [f32]) {
    let wp = w + 2 * k;
    for j in 0..w {
        dst[(j + k) * wp + k..(j + k) * wp + k + w].copy_from_slice(&src_plane[j * w..(j + 1) * w]);
    }
}

/// Pads every face with the adjacent rows/columns of its neighbor faces.
pub fn cube_pad(cm: &CubeMap, k: usize) -> Result<PaddedCubeMap> {
    cube_pad_with(cm, k, CornerFill::Average)
}

pub fn cube_pad_with(cm: &CubeMap, k: usize, corner: CornerFill) -> Result<PaddedCubeMap> {
    let w = cm.width();
    if k == 0 || k >= w {
        return Err(Error::Argument(format!(
            "pad width must satisfy 1 <= k < w, got k={k} w={w}"
        )));
    }
    let c = cm.channels();
    let wp = w + 2 * k;
    let mut tensor = Tensor::zeros(&[FACE_COUNT, c, wp, wp]);
    for f in 0..FACE_COUNT {
        for ch in 0..c {
            let base = (f * c + ch) * wp * wp;
            let dst = &mut tensor.data_mut()[base..base + wp * wp];
            fill_interior(cm.face_plane(f, ch), w, k, dst);
            cube_pad_plane(cm.tensor().data(), c, w, f, ch, k, corner, dst);
        }
    }
    Ok(PaddedCubeMap {
        k,
        corner_fill: corner,
        tensor,
    })
}

/// Conventional zero padding of the face stack.
pub fn zero_pad(cm: &CubeMap, k: usize) -> Result<PaddedCubeMap> {
    if k == 0 {
        return Err(Error::Argument("pad width must be >= 1".into()));
    }
    let (c, w) = (cm.channels(), cm.width());
    let wp = w + 2 * k;
    let mut tensor = Tensor::zeros(&[FACE_COUNT, c, wp, wp]);
    for f in 0..FACE_COUNT {
        for ch in 0..c {
            let base = (f * c + ch) * wp * wp;
            fill_interior(cm.face_plane(f, ch), w, k, &mut tensor.data_mut()[base..base + wp * wp]);
        }
    }
    Ok(PaddedCubeMap {
        k,
        corner_fill: CornerFill::Zero,
        tensor,
    })
}

/// Pixel rectangle of the central 90-degree region inside an overlap face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropSpec {
    pub offset: usize,
    pub size: usize,
}

/// Renders six enlarged gnomonic faces (fov in [pi/2, pi)) at the cube
/// orientations, plus the crop rectangle of the central 90-degree region.
///
/// Face width follows ceil(w_base * tan(fov/2) / tan(pi/4)), so the texel
/// density at the face center matches the 90-degree faces.
pub fn render_overlap_faces(
    m: &EquirectMap,
    w_base: usize,
    fov: f64,
) -> Result<(Tensor, CropSpec)> {
    let quarter = std::f64::consts::FRAC_PI_4;
    if !(std::f64::consts::FRAC_PI_2..std::f64::consts::PI).contains(&fov) {
        return Err(Error::Argument(format!(
            "overlap fov must lie in [pi/2, pi), got {fov}"
        )));
    }
    if w_base < 2 {
        return Err(Error::Argument("base face width must be >= 2".into()));
    }
    let half_tan = (fov / 2.0).tan();
    let w_o = (w_base as f64 * half_tan / quarter.tan()).ceil() as usize;

    let (c, q, p) = (m.channels(), m.height(), m.width());
    let mut out = Tensor::zeros(&[FACE_COUNT, c, w_o, w_o]);
    for face in FaceId::ALL {
        let f = face.index();
        for j in 0..w_o {
            let tv = half_tan * texel_coord(j, w_o);
            for i in 0..w_o {
                let tu = half_tan * texel_coord(i, w_o);
                let n = face.normal();
                let au = face.axis_u();
                let av = face.axis_v();
                let d = [
                    n[0] + tu * au[0] + tv * av[0],
                    n[1] + tu * au[1] + tv * av[1],
                    n[2] + tu * au[2] + tv * av[2],
                ];
                let dir = crate::sphere::SphericalDirection::new(d[0], d[1], d[2])
                    .expect("face directions are never zero");
                let (x, y) = crate::sphere::dir_to_equirect(dir, p, q);
                for ch in 0..c {
                    out.data_mut()[((f * c + ch) * w_o + j) * w_o + i] =
                        sample_plane_wrap(m.plane(ch), q, p, x, y);
                }
            }
        }
    }

    // texel centers whose tangent coordinate lies within the 90-degree face
    let inside = |i: usize| (half_tan * texel_coord(i, w_o)).abs() <= 1.0 + 1e-9;
    let offset = (0..w_o)
        .find(|&i| inside(i))
        .ok_or_else(|| Error::Internal("empty overlap crop".into()))?;
    let end = (0..w_o).rev().find(|&i| inside(i)).unwrap();
    Ok((
        out,
        CropSpec {
            offset,
            size: end - offset + 1,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{equirect_to_cubemap, face_direction};

    fn seeded_cubemap(c: usize, w: usize, seed: u32) -> CubeMap {
        let len = FACE_COUNT * c * w * w;
        let data: Vec<f32> = (0..len)
            .map(|i| {
                let x = (i as u32).wrapping_mul(2654435761).wrapping_add(seed);
                (x >> 8) as f32 / (1u32 << 24) as f32
            })
            .collect();
        CubeMap::from_parts(c, w, data).unwrap()
    }

    /// The hand-checked table; the derivation must reproduce it exactly.
    const EXPECTED: [(char, char, char, char, bool); 24] = [
        ('B', 'T', 'T', 'T', true),
        ('B', 'B', 'D', 'B', true),
        ('B', 'L', 'R', 'R', false),
        ('B', 'R', 'L', 'L', false),
        ('D', 'T', 'F', 'B', false),
        ('D', 'B', 'B', 'B', true),
        ('D', 'L', 'L', 'B', true),
        ('D', 'R', 'R', 'B', false),
        ('F', 'T', 'T', 'B', false),
        ('F', 'B', 'D', 'T', false),
        ('F', 'L', 'L', 'R', false),
        ('F', 'R', 'R', 'L', false),
        ('L', 'T', 'T', 'L', false),
        ('L', 'B', 'D', 'L', true),
        ('L', 'L', 'B', 'R', false),
        ('L', 'R', 'F', 'L', false),
        ('R', 'T', 'T', 'R', true),
        ('R', 'B', 'D', 'R', false),
        ('R', 'L', 'F', 'R', false),
        ('R', 'R', 'B', 'L', false),
        ('T', 'T', 'B', 'T', true),
        ('T', 'B', 'F', 'T', false),
        ('T', 'L', 'L', 'T', false),
        ('T', 'R', 'R', 'T', true),
    ];

    fn side_letter(s: Side) -> char {
        match s {
            Side::Top => 'T',
            Side::Bottom => 'B',
            Side::Left => 'L',
            Side::Right => 'R',
        }
    }

    #[test]
    fn adjacency_matches_pinned_table() {
        let table = AdjacencyTable::derive().unwrap();
        let mut got: Vec<(char, char, char, char, bool)> = table
            .entries()
            .map(|e| {
                (
                    e.face.letter(),
                    side_letter(e.side),
                    e.neighbor.letter(),
                    side_letter(e.neighbor_side),
                    e.reversed,
                )
            })
            .collect();
        let mut expected = EXPECTED.to_vec();
        got.sort();
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn adjacency_examples() {
        let table = AdjacencyTable::global();
        let e = table.lookup(FaceId::Front, Side::Right);
        assert_eq!(
            (e.neighbor, e.neighbor_side, e.reversed),
            (FaceId::Right, Side::Left, false)
        );
        let e = table.lookup(FaceId::Front, Side::Top);
        assert_eq!(
            (e.neighbor, e.neighbor_side, e.reversed),
            (FaceId::Top, Side::Bottom, false)
        );
    }

    #[test]
    fn adjacency_is_involution() {
        let table = AdjacencyTable::global();
        for e in table.entries() {
            let back = table.lookup(e.neighbor, e.neighbor_side);
            assert_eq!(back.neighbor, e.face);
            assert_eq!(back.neighbor_side, e.side);
            assert_eq!(back.reversed, e.reversed);
        }
    }

    /// Boundary sweeps of paired sides coincide pointwise on the sphere.
    #[test]
    fn edge_sharing_law() {
        let table = AdjacencyTable::global();
        for e in table.entries() {
            for s in 0..64 {
                let t = (2 * s + 1) as f64 / 64.0 - 1.0;
                let tn = if e.reversed { -t } else { t };
                let (u_a, v_a) = match e.side {
                    Side::Top => (t, -1.0),
                    Side::Bottom => (t, 1.0),
                    Side::Left => (-1.0, t),
                    Side::Right => (1.0, t),
                };
                let (u_b, v_b) = match e.neighbor_side {
                    Side::Top => (tn, -1.0),
                    Side::Bottom => (tn, 1.0),
                    Side::Left => (-1.0, tn),
                    Side::Right => (1.0, tn),
                };
                let a = face_direction(e.face, u_a, v_a).unwrap().as_array();
                let b = face_direction(e.neighbor, u_b, v_b).unwrap().as_array();
                for i in 0..3 {
                    assert!(
                        (a[i] - b[i]).abs() <= 1e-6,
                        "{:?}/{:?} t={t}: {a:?} vs {b:?}",
                        e.face,
                        e.side
                    );
                }
            }
        }
    }

    #[test]
    fn pad_band_copies_neighbor_column() {
        let cm = seeded_cubemap(1, 4, 99);
        let padded = cube_pad(&cm, 1).unwrap();
        let w = 4;
        let wp = w + 2;
        let f = FaceId::Front.index();
        let plane = padded.face_plane(f, 0);
        let right = cm.face_plane(FaceId::Right.index(), 0);
        for t in 0..w {
            let got = plane[(1 + t) * wp + (1 + w)];
            let expect = right[t * w]; // column 0, not reversed
            assert_eq!(got.to_bits(), expect.to_bits());
        }
    }

    #[test]
    fn constant_cubemap_pads_constant() {
        let cm = CubeMap::from_parts(2, 6, vec![0.3; FACE_COUNT * 2 * 36]).unwrap();
        for k in 1..=3 {
            let padded = cube_pad(&cm, k).unwrap();
            assert!(
                padded.tensor().data().iter().all(|&v| v == 0.3),
                "k = {k}"
            );
        }
    }

    #[test]
    fn minimal_width_pads() {
        let cm = seeded_cubemap(1, 2, 5);
        let padded = cube_pad(&cm, 1).unwrap();
        let interior = padded.interior();
        assert_eq!(interior.tensor().data(), cm.tensor().data());
    }

    /// Every pad texel is a bitwise copy of one identifiable source texel.
    #[test]
    fn pad_exactness_oracle() {
        let table = AdjacencyTable::global();
        for (case, (w, k)) in [(4usize, 1usize), (8, 2), (16, 3), (8, 1)].iter().enumerate() {
            let (w, k) = (*w, *k);
            let cm = seeded_cubemap(2, w, case as u32 * 77 + 3);
            let padded = cube_pad(&cm, k).unwrap();
            let wp = w + 2 * k;
            for face in FaceId::ALL {
                for ch in 0..2 {
                    let plane = padded.face_plane(face.index(), ch);
                    for side in Side::ALL {
                        let e = table.lookup(face, side);
                        let nb = cm.face_plane(e.neighbor.index(), ch);
                        for m in 0..k {
                            for t in 0..w {
                                let (row, col) = match side {
                                    Side::Top => (k - 1 - m, k + t),
                                    Side::Bottom => (k + w + m, k + t),
                                    Side::Left => (k + t, k - 1 - m),
                                    Side::Right => (k + t, k + w + m),
                                };
                                let tn = if e.reversed { w - 1 - t } else { t };
                                let expect = boundary_texel(nb, e.neighbor_side, m, tn, w);
                                assert_eq!(
                                    plane[row * wp + col].to_bits(),
                                    expect.to_bits(),
                                    "{face:?} {side:?} m={m} t={t}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    /// For k=1 the non-corner pads form a bijection with non-corner edge
    /// texels.
    #[test]
    fn pad_bijection_on_edges() {
        let w = 8usize;
        let ids: Vec<f32> = (0..FACE_COUNT * w * w).map(|i| i as f32).collect();
        let cm = CubeMap::from_parts(1, w, ids).unwrap();
        let padded = cube_pad(&cm, 1).unwrap();
        let wp = w + 2;
        let mut seen = std::collections::HashMap::new();
        for f in 0..FACE_COUNT {
            let plane = padded.face_plane(f, 0);
            for t in 1..w - 1 {
                for (row, col) in [(0, 1 + t), (wp - 1, 1 + t), (1 + t, 0), (1 + t, wp - 1)] {
                    let id = plane[row * wp + col] as usize;
                    *seen.entry(id).or_insert(0usize) += 1;
                }
            }
        }
        // expected sources: all boundary texels that are not face corners
        let mut expected = std::collections::HashSet::new();
        for f in 0..FACE_COUNT {
            for j in 0..w {
                for i in 0..w {
                    let on_border = j == 0 || j == w - 1 || i == 0 || i == w - 1;
                    let corner = (j == 0 || j == w - 1) && (i == 0 || i == w - 1);
                    if on_border && !corner {
                        expected.insert(f * w * w + j * w + i);
                    }
                }
            }
        }
        assert_eq!(seen.len(), expected.len());
        for (id, count) in seen {
            assert_eq!(count, 1, "texel {id} duplicated");
            assert!(expected.contains(&id));
        }
    }

    #[test]
    fn zero_pad_basics() {
        let cm = CubeMap::from_parts(1, 4, vec![0.3; FACE_COUNT * 16]).unwrap();
        let padded = zero_pad(&cm, 1).unwrap();
        let wp = 6;
        let plane = padded.face_plane(0, 0);
        for i in 0..wp {
            assert_eq!(plane[i], 0.0);
            assert_eq!(plane[(wp - 1) * wp + i], 0.0);
            assert_eq!(plane[i * wp], 0.0);
            assert_eq!(plane[i * wp + wp - 1], 0.0);
        }
        assert_eq!(plane[wp + 1], 0.3);

        let sum_in: f64 = cm.tensor().data().iter().map(|&v| v as f64).sum();
        let sum_out: f64 = padded.tensor().data().iter().map(|&v| v as f64).sum();
        assert!((sum_in - sum_out).abs() < 1e-6);
    }

    #[test]
    fn cube_and_zero_pad_agree_on_interior() {
        let cm = seeded_cubemap(1, 8, 11);
        let a = cube_pad(&cm, 2).unwrap();
        let b = zero_pad(&cm, 2).unwrap();
        assert_eq!(a.interior().tensor().data(), cm.tensor().data());
        assert_eq!(b.interior().tensor().data(), cm.tensor().data());
    }

    #[test]
    fn pad_rejects_bad_width() {
        let cm = seeded_cubemap(1, 4, 0);
        assert!(cube_pad(&cm, 0).is_err());
        assert!(cube_pad(&cm, 4).is_err());
        assert!(zero_pad(&cm, 0).is_err());
    }

    #[test]
    fn overlap_face_width_follows_tangent_rule() {
        let m = EquirectMap::from_parts(1, 64, 128, vec![0.5; 64 * 128]).unwrap();
        let (faces, crop) = render_overlap_faces(&m, 64, 120f64.to_radians()).unwrap();
        assert_eq!(faces.dims()[2], 111);
        assert!(crop.size >= 63 && crop.size <= 66, "crop = {crop:?}");
        // constant input renders constant
        assert!(faces.data().iter().all(|&v| v == 0.5));
        // area ratio vs 90-degree faces is (tan 60 / tan 45)^2 = 3
        let ratio = (60f64.to_radians().tan() / 45f64.to_radians().tan()).powi(2);
        assert!((ratio - 3.0).abs() < 1e-6);
    }

    #[test]
    fn overlap_90_degrees_is_plain_projection() {
        let p = 128usize;
        let q = 64;
        let data: Vec<f32> = (0..q * p).map(|i| ((i * 29) % 83) as f32 / 83.0).collect();
        let m = EquirectMap::from_parts(1, q, p, data).unwrap();
        let (faces, crop) = render_overlap_faces(&m, 32, std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(crop, CropSpec { offset: 0, size: 32 });
        let cm = equirect_to_cubemap(&m, 32).unwrap();
        for f in 0..FACE_COUNT {
            let a = &faces.data()[f * 32 * 32..(f + 1) * 32 * 32];
            let b = cm.face_plane(f, 0);
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn overlap_rejects_out_of_range_fov() {
        let m = EquirectMap::from_parts(1, 8, 16, vec![0.0; 128]).unwrap();
        assert!(render_overlap_faces(&m, 8, 1.0).is_err());
        assert!(render_overlap_faces(&m, 8, std::f64::consts::PI).is_err());
    }
}
