//! PNG and PFM import/export for equirectangular maps and single faces.
//!
//! PNG is 8-bit, 1 or 3 channels; values map linearly to [0, 1]. PFM keeps
//! f32 values exactly (header scale -1.0, little-endian, rows bottom-up).
//! Grayscale exports can optionally apply a heat colormap; the default is
//! plain grayscale.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{EquirectMap, Tensor};

/// Colormap for exporting single-channel maps. `Heat` ramps
/// black -> red -> yellow -> white.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Colormap {
    #[default]
    Gray,
    Heat,
}

impl Colormap {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gray" | "grey" => Ok(Colormap::Gray),
            "heat" => Ok(Colormap::Heat),
            other => Err(Error::Argument(format!("unknown colormap '{other}'"))),
        }
    }

    fn rgb(self, v: f32) -> [u8; 3] {
        let v = v.clamp(0.0, 1.0);
        match self {
            Colormap::Gray => {
                let g = to_u8(v);
                [g, g, g]
            }
            Colormap::Heat => {
                let r = (v * 3.0).min(1.0);
                let g = (v * 3.0 - 1.0).clamp(0.0, 1.0);
                let b = (v * 3.0 - 2.0).clamp(0.0, 1.0);
                [to_u8(r), to_u8(g), to_u8(b)]
            }
        }
    }
}

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Imports a PNG or PFM file (by extension) as an equirectangular map.
pub fn image_import(path: &Path) -> Result<EquirectMap> {
    match extension(path) {
        Some("pfm") => pfm_import(path),
        _ => png_import(path),
    }
}

/// Exports channels-first data as PNG (lossy 8-bit) or PFM (exact) by
/// extension. Single-channel data may be colormapped.
pub fn image_export(t: &Tensor, path: &Path, colormap: Option<Colormap>) -> Result<()> {
    let (c, h, w) = chw(t)?;
    match extension(path) {
        Some("pfm") => pfm_export(t, path),
        _ => {
            if let (1, Some(map)) = (c, colormap) {
                let plane = t.data();
                let mut buf = Vec::with_capacity(3 * h * w);
                for &v in &plane[..h * w] {
                    buf.extend_from_slice(&map.rgb(v));
                }
                image::save_buffer(path, &buf, w as u32, h as u32, image::ColorType::Rgb8)
                    .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
            } else {
                png_export(t, path)
            }
        }
    }
}

fn extension(path: &Path) -> Option<&str> {
    path.extension().and_then(|e| e.to_str())
}

fn chw(t: &Tensor) -> Result<(usize, usize, usize)> {
    match t.dims() {
        [c, h, w] => Ok((*c, *h, *w)),
        [h, w] => Ok((1, *h, *w)),
        d => Err(Error::Shape(format!(
            "image export needs [c, h, w] or [h, w], got {d:?}"
        ))),
    }
}

fn png_import(path: &Path) -> Result<EquirectMap> {
    let img = image::open(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (c, data) = match img {
        image::DynamicImage::ImageLuma8(g) => {
            (1, g.into_raw().iter().map(|&v| v as f32 / 255.0).collect())
        }
        image::DynamicImage::ImageRgb8(rgb) => {
            let raw = rgb.into_raw();
            let mut data = vec![0.0f32; 3 * h * w];
            for (i, px) in raw.chunks_exact(3).enumerate() {
                for ch in 0..3 {
                    data[ch * h * w + i] = px[ch] as f32 / 255.0;
                }
            }
            (3, data)
        }
        other => {
            return Err(Error::Format(format!(
                "{}: unsupported pixel format {:?} (need 8-bit gray or rgb)",
                path.display(),
                other.color()
            )))
        }
    };
    EquirectMap::from_parts(c, h, w, data)
}

fn png_export(t: &Tensor, path: &Path) -> Result<()> {
    let (c, h, w) = chw(t)?;
    let data = t.data();
    match c {
        1 => {
            let buf: Vec<u8> = data[..h * w].iter().map(|&v| to_u8(v)).collect();
            image::save_buffer(path, &buf, w as u32, h as u32, image::ColorType::L8)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        }
        3 => {
            let mut buf = vec![0u8; 3 * h * w];
            for i in 0..h * w {
                for ch in 0..3 {
                    buf[3 * i + ch] = to_u8(data[ch * h * w + i]);
                }
            }
            image::save_buffer(path, &buf, w as u32, h as u32, image::ColorType::Rgb8)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        }
        other => Err(Error::Shape(format!(
            "PNG export supports 1 or 3 channels, got {other}"
        ))),
    }
}

fn pfm_import(path: &Path) -> Result<EquirectMap> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let fail = |m: String| Error::Format(format!("{}: {m}", path.display()));

    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PFM header".into()));
        }
        let tok = String::from_utf8_lossy(&bytes[start..pos]).into_owned();
        pos += 1; // single whitespace after each token
        Ok(tok)
    };

    let kind = token()?;
    let c = match kind.as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(fail(format!("bad PFM type '{other}'"))),
    };
    let w: usize = token()?.parse().map_err(|_| fail("bad width".into()))?;
    let h: usize = token()?.parse().map_err(|_| fail("bad height".into()))?;
    let scale: f32 = token()?.parse().map_err(|_| fail("bad scale".into()))?;
    if scale >= 0.0 {
        return Err(fail("big-endian PFM (positive scale) not supported".into()));
    }
    let mag = -scale;
    let need = c * h * w * 4;
    if bytes.len() - pos != need {
        return Err(fail(format!(
            "payload is {} bytes, expected {need}",
            bytes.len() - pos
        )));
    }
    // PFM rows run bottom-to-top, channels interleaved.
    let mut data = vec![0.0f32; c * h * w];
    for row in 0..h {
        let y = h - 1 - row;
        for x in 0..w {
            for ch in 0..c {
                let off = pos + 4 * ((row * w + x) * c + ch);
                let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) * mag;
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "{}: non-finite value {v}",
                        path.display()
                    )));
                }
                data[ch * h * w + y * w + x] = v;
            }
        }
    }
    EquirectMap::from_parts(c, h, w, data)
}

fn pfm_export(t: &Tensor, path: &Path) -> Result<()> {
    let (c, h, w) = chw(t)?;
    let kind = match c {
        1 => "Pf",
        3 => "PF",
        other => {
            return Err(Error::Shape(format!(
                "PFM export supports 1 or 3 channels, got {other}"
            )))
        }
    };
    let mut file = fs::File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    write!(file, "{kind}\n{w} {h}\n-1.0\n")?;
    let data = t.data();
    let mut buf = Vec::with_capacity(c * h * w * 4);
    for row in 0..h {
        let y = h - 1 - row;
        for x in 0..w {
            for ch in 0..c {
                let v = data[ch * h * w + y * w + x];
                if !v.is_finite() {
                    return Err(Error::Data(format!("refusing to write non-finite {v}")));
                }
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    file.write_all(&buf)?;
    Ok(())
}
