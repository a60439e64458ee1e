//! Run the static saliency pipeline in all four variants on a frame whose
//! bright blob straddles the front/right face seam, and write the maps.
//! Cube padding keeps the seam response alive; the zero-padded variants
//! suppress it.

use cubepad::image_io::{image_export, Colormap};
use cubepad::nn::{forward_static, generate_network, ForwardOptions, PipelineMode};
use cubepad::sphere::SphericalDirection;
use cubepad::tensor::EquirectMap;

fn seam_blob_frame(p: usize) -> cubepad::Result<EquirectMap> {
    let q = p / 2;
    // one blob on the front/right seam, one at the front face center as a
    // normalization anchor away from any face border
    let seam = SphericalDirection::from_angles(std::f64::consts::FRAC_PI_4, 0.0);
    let center = SphericalDirection::from_angles(0.0, 0.0);
    let mut data = vec![0.05f32; 3 * q * p];
    for ch in 0..3 {
        for y in 0..q {
            let lat = (0.5 - (y as f64 + 0.5) / q as f64) * std::f64::consts::PI;
            for x in 0..p {
                let lon = ((x as f64 + 0.5) / p as f64 - 0.5) * std::f64::consts::TAU;
                let d = SphericalDirection::from_angles(lon, lat);
                let a1 = d.dot(seam).clamp(-1.0, 1.0).acos();
                let a2 = d.dot(center).clamp(-1.0, 1.0).acos();
                let v = 0.05
                    + 0.95 * (-a1 * a1 / (2.0 * 0.10f64.powi(2))).exp()
                    + 0.95 * (-a2 * a2 / (2.0 * 0.10f64.powi(2))).exp();
                data[(ch * q + y) * p + x] = (v as f32).min(1.0);
            }
        }
    }
    EquirectMap::from_parts(3, q, p, data)
}

fn main() -> cubepad::Result<()> {
    let out_dir = std::path::Path::new("examples_out/static_saliency");
    std::fs::create_dir_all(out_dir)?;

    let p = 128usize;
    let frame = seam_blob_frame(p)?;
    image_export(frame.tensor(), &out_dir.join("frame.png"), None)?;

    let net = generate_network(2, &[3, 6], 3, 3)?;
    let opts = ForwardOptions::default();
    let seam_col = (p as f64 * (45.0 / 360.0 + 0.5)) as usize;

    for mode in [
        PipelineMode::CubePad,
        PipelineMode::ZeroPad,
        PipelineMode::Equirect,
        PipelineMode::Overlap,
    ] {
        let sal = forward_static(&frame, &net, mode, &opts)?;
        let seam_max = (0..sal.height())
            .map(|y| sal.get(0, y, seam_col))
            .fold(f32::MIN, f32::max);
        println!("{:<10} seam response {seam_max:.3}", mode.label());
        image_export(
            sal.tensor(),
            &out_dir.join(format!("saliency_{}.png", mode.label().to_lowercase())),
            Some(Colormap::Heat),
        )?;
    }
    println!("maps written to {}", out_dir.display());
    Ok(())
}
