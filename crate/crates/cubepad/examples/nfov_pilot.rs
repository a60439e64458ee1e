//! Pilot a viewport across a sequence with a blob drifting in longitude:
//! score every candidate viewing angle per frame, then link them into a
//! velocity-bounded trajectory.

use cubepad::eval::great_circle;
use cubepad::pilot::{link_trajectory, score_viewangles, CandidateGrid};
use cubepad::tensor::EquirectMap;

fn blob_map(p: usize, q: usize, lon0: f64, sigma_deg: f64) -> EquirectMap {
    let inv = 1.0 / (2.0 * sigma_deg.to_radians().powi(2));
    let mut data = vec![0.0f32; q * p];
    for y in 0..q {
        let lat = (0.5 - (y as f64 + 0.5) / q as f64) * std::f64::consts::PI;
        for x in 0..p {
            let lon = ((x as f64 + 0.5) / p as f64 - 0.5) * std::f64::consts::TAU;
            let ang = great_circle((lon, lat), (lon0, 0.0));
            data[y * p + x] = (-ang * ang * inv).exp() as f32;
        }
    }
    EquirectMap::from_parts(1, q, p, data).unwrap()
}

fn main() -> cubepad::Result<()> {
    let (p, q) = (128usize, 64usize);
    let grid = CandidateGrid::default();
    println!(
        "{} candidates ({}-degree viewport)",
        grid.len(),
        grid.fov().to_degrees()
    );

    let frames = 16usize;
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    for t in 0..frames {
        let lon = (-40.0 + 5.0 * t as f64).to_radians();
        truth.push(lon);
        scores.push(score_viewangles(&blob_map(p, q, lon, 25.0), &grid)?);
    }

    let traj = link_trajectory(&grid, &scores, 10f64.to_radians())?;
    println!("total trajectory score: {:.4}\n", traj.total);
    println!("{:>5} {:>10} {:>10} {:>10}", "frame", "blob", "chosen", "error");
    for (t, step) in traj.steps.iter().enumerate() {
        let err = great_circle((step.lon, step.lat), (truth[t], 0.0));
        println!(
            "{t:>5} {:>9.1}  {:>9.1}  {:>9.2}",
            truth[t].to_degrees(),
            step.lon.to_degrees(),
            err.to_degrees()
        );
    }
    Ok(())
}
