//! Show the face adjacency table and compare cube padding against zero
//! padding on a rendered sphere: cube pads continue the image across face
//! borders, zero pads cut it off.

use cubepad::bench::synthetic_frame;
use cubepad::padding::{cube_pad, zero_pad, AdjacencyTable};
use cubepad::sphere::equirect_to_cubemap;

fn main() -> cubepad::Result<()> {
    let table = AdjacencyTable::global();
    println!("face adjacency (24 edge pairings):");
    for e in table.entries() {
        println!(
            "  {:>5?} {:<6?} -> {:>5?} {:<6?} {}",
            e.face,
            e.side,
            e.neighbor,
            e.neighbor_side,
            if e.reversed { "(reversed)" } else { "" }
        );
    }

    let frame = synthetic_frame(11, 1, 128, 256, 0.0);
    let cube = equirect_to_cubemap(&frame, 64)?;
    let k = 2;
    let cp = cube_pad(&cube, k)?;
    let zp = zero_pad(&cube, k)?;

    // measure the jump between the outermost face row and the first pad row
    let face = 2; // front
    let w = cube.width();
    let wp = w + 2 * k;
    let mut cp_jump = 0.0f32;
    let mut zp_jump = 0.0f32;
    for (plane, jump) in [(cp.face_plane(face, 0), &mut cp_jump), (zp.face_plane(face, 0), &mut zp_jump)] {
        for t in 0..w {
            let inner = plane[k * wp + (k + t)]; // first face row
            let pad = plane[(k - 1) * wp + (k + t)]; // innermost pad row
            *jump = jump.max((inner - pad).abs());
        }
    }
    println!("\nlargest value jump across the top border of the front face:");
    println!("  cube padding: {cp_jump:.4}  (continues the sphere)");
    println!("  zero padding: {zp_jump:.4}  (drops to zero)");
    Ok(())
}
