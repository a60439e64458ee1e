//! Synthesize ground truth from a handful of viewpoints, then score three
//! predictions against it: the ground truth itself, a blurry guess, and
//! uniform noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubepad::eval::{auc_borji, auc_judd, binarize_gt, cc, gt_heatmap, Viewpoint};
use cubepad::image_io::{image_export, Colormap};
use cubepad::tensor::EquirectMap;

fn main() -> cubepad::Result<()> {
    let out_dir = std::path::Path::new("examples_out/evaluate_metrics");
    std::fs::create_dir_all(out_dir)?;
    let (p, q) = (256usize, 128usize);

    let vps = vec![
        Viewpoint::new(0, 0.5, 0.1)?,
        Viewpoint::new(0, -1.2, -0.4)?,
        Viewpoint::new(0, 2.4, 0.6)?,
    ];
    let gt = gt_heatmap(&vps, p, q, 5.0)?;
    let mask = binarize_gt(&gt)?;
    image_export(gt.tensor(), &out_dir.join("ground_truth.png"), Some(Colormap::Heat))?;
    println!("{} fixation pixels after mu+3sigma thresholding", mask.positives());

    // blurry guess: same kernels, twice the width
    let blurry = gt_heatmap(&vps, p, q, 10.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise =
        EquirectMap::from_parts(1, q, p, (0..q * p).map(|_| rng.gen_range(0.0..1.0)).collect())?;

    println!("\n{:<14} {:>8} {:>9} {:>7}", "prediction", "auc-judd", "auc-borji", "cc");
    for (name, pred) in [("ground truth", &gt), ("blurry", &blurry), ("noise", &noise)] {
        let judd = auc_judd(pred, &mask)?;
        let borji = auc_borji(pred, &mask, 100, 7)?;
        let corr = cc(pred, &gt)?;
        println!("{name:<14} {judd:>8.4} {borji:>9.4} {corr:>7.4}");
    }
    Ok(())
}
