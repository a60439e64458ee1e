//! Compute the three temporal losses over a drifting saliency sequence and
//! verify the analytic gradient against finite differences at a few pixels.

use cubepad::loss::{flowgen, loss_grad, loss_motion, loss_recons, loss_smooth, loss_total, LossWeights};
use cubepad::tensor::EquirectMap;

fn drifting_maps(q: usize, p: usize, frames: usize, px_per_frame: f32) -> Vec<EquirectMap> {
    (0..frames)
        .map(|t| {
            let cx = 0.3 * p as f32 + t as f32 * px_per_frame;
            let data: Vec<f32> = (0..q * p)
                .map(|i| {
                    let (y, x) = ((i / p) as f32, (i % p) as f32);
                    let d2 = (x - cx).powi(2) + (y - 0.5 * q as f32).powi(2);
                    (-d2 / 18.0).exp()
                })
                .collect();
            EquirectMap::from_parts(1, q, p, data).unwrap()
        })
        .collect()
}

fn main() -> cubepad::Result<()> {
    let (q, p) = (32usize, 64usize);
    let speed = 2.0f32;
    let maps = drifting_maps(q, p, 5, speed);
    // flow that exactly explains the drift
    let flows: Vec<_> = (0..4).map(|_| flowgen::constant(q, p, -speed, 0.0)).collect();

    let weights = LossWeights::default();
    let breakdown = loss_total(&maps, &flows, &weights)?;
    println!("weights: lr={} ls={} lm={} eps={}", weights.lambda_r, weights.lambda_s, weights.lambda_m, weights.epsilon);
    for (t, s) in breakdown.steps.iter().enumerate() {
        println!(
            "step {}: recons {:.6}  smooth {:.6}  motion {:.6}  total {:.6}",
            t + 1,
            s.recons,
            s.smooth,
            s.motion,
            s.total
        );
    }
    println!("sequence total: {:.6}", breakdown.total);

    // spot-check the gradient with central differences
    let grad = loss_grad(&maps[1], &maps[0], &flows[0], &weights)?;
    let total = |m: &EquirectMap| -> f64 {
        weights.lambda_r * loss_recons(m, &maps[0], &flows[0]).unwrap()
            + weights.lambda_s * loss_smooth(m, &maps[0]).unwrap()
            + weights.lambda_m * loss_motion(m, &flows[0], weights.epsilon).unwrap()
    };
    for px in [100usize, 700, 1500] {
        let h = 1e-3f32;
        let mut plus = maps[1].clone();
        plus.plane_mut(0)[px] += h;
        let mut minus = maps[1].clone();
        minus.plane_mut(0)[px] -= h;
        let dh = (plus.plane(0)[px] - minus.plane(0)[px]) as f64;
        let fd = (total(&plus) - total(&minus)) / dh;
        println!(
            "pixel {px}: analytic {:+.3e}  finite-diff {:+.3e}",
            grad.plane(0)[px],
            fd
        );
    }
    Ok(())
}
