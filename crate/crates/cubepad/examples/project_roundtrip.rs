//! Project a synthetic panorama onto the six cube faces and back, reporting
//! the round-trip PSNR and writing the face images.
//!
//! ```sh
//! cargo run --example project_roundtrip
//! ```

use cubepad::bench::synthetic_frame;
use cubepad::image_io::image_export;
use cubepad::sphere::{cubemap_to_equirect, equirect_to_cubemap, psnr, FaceId};
use cubepad::tensor::Tensor;

fn main() -> cubepad::Result<()> {
    let out_dir = std::path::Path::new("examples_out/project_roundtrip");
    std::fs::create_dir_all(out_dir)?;

    let p = 512usize;
    let frame = synthetic_frame(3, 3, p / 2, p, 0.0);
    image_export(frame.tensor(), &out_dir.join("panorama.png"), None)?;

    let w = p / 4;
    let cube = equirect_to_cubemap(&frame, w)?;
    println!(
        "projected {p}x{} panorama onto 6 faces of {w}x{w} ({}% of the source pixels)",
        p / 2,
        100 * cube.tensor().len() / frame.tensor().len()
    );

    for face in FaceId::ALL {
        let mut data = Vec::with_capacity(3 * w * w);
        for ch in 0..3 {
            data.extend_from_slice(cube.face_plane(face.index(), ch));
        }
        let t = Tensor::new(vec![3, w, w], data)?;
        image_export(&t, &out_dir.join(format!("face_{}.png", face.letter())), None)?;
    }

    let restored = cubemap_to_equirect(&cube, p, p / 2)?;
    image_export(restored.tensor(), &out_dir.join("restored.png"), None)?;
    println!("round-trip psnr: {:.2} dB", psnr(&frame, &restored)?);
    println!("outputs in {}", out_dir.display());
    Ok(())
}
