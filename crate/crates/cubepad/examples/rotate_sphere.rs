//! Whole-sphere rotation: yaw by an exact column shift, then a composed
//! yaw/pitch/roll resampling, writing each stage as PNG.

use cubepad::bench::synthetic_frame;
use cubepad::image_io::image_export;
use cubepad::sphere::rotate_sphere;

fn main() -> cubepad::Result<()> {
    let out_dir = std::path::Path::new("examples_out/rotate_sphere");
    std::fs::create_dir_all(out_dir)?;

    let frame = synthetic_frame(8, 3, 128, 256, 0.0);
    image_export(frame.tensor(), &out_dir.join("original.png"), None)?;

    // quarter-turn yaw on a width divisible by 4: pure column permutation
    let yawed = rotate_sphere(&frame, std::f64::consts::FRAC_PI_2, 0.0, 0.0)?;
    image_export(yawed.tensor(), &out_dir.join("yaw90.png"), None)?;
    let shifted = frame.get(0, 30, (100 + 256 - 64) % 256);
    assert_eq!(yawed.get(0, 30, 100).to_bits(), shifted.to_bits());
    println!("yaw 90 degrees: exact 64-column roll (bitwise)");

    let tumbled = rotate_sphere(&frame, 0.4, -0.7, 0.25)?;
    image_export(tumbled.tensor(), &out_dir.join("tumbled.png"), None)?;
    println!("composed rotation resampled bilinearly");
    println!("outputs in {}", out_dir.display());
    Ok(())
}
