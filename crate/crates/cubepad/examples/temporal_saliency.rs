//! Feed a short synthetic sequence through the ConvLSTM pipeline and watch
//! the outputs settle as the recurrent state accumulates evidence.

use cubepad::bench::synthetic_frame;
use cubepad::image_io::{image_export, Colormap};
use cubepad::nn::{forward_temporal, generate_convlstm, generate_network, ForwardOptions, PipelineMode};

fn main() -> cubepad::Result<()> {
    let out_dir = std::path::Path::new("examples_out/temporal_saliency");
    std::fs::create_dir_all(out_dir)?;

    // same scene repeated: the temporal model should converge on it
    let frames: Vec<_> = (0..6).map(|_| synthetic_frame(4, 3, 64, 128, 0.02)).collect();
    let net = generate_network(5, &[3, 8], 4, 3)?;
    let lstm = generate_convlstm(1, 4)?;
    let z = 5;
    let outs = forward_temporal(&frames, &net, &lstm, z, PipelineMode::CubePad, &ForwardOptions::default())?;

    let mut prev: Option<&cubepad::EquirectMap> = None;
    for (t, map) in outs.iter().enumerate() {
        match prev {
            None => println!("frame {t}: (first output)"),
            Some(p) => {
                let delta = map
                    .tensor()
                    .data()
                    .iter()
                    .zip(p.tensor().data())
                    .map(|(a, b)| (a - b).abs() as f64)
                    .sum::<f64>()
                    / map.tensor().len() as f64;
                println!("frame {t}: mean |delta to previous output| = {delta:.5}");
            }
        }
        image_export(
            map.tensor(),
            &out_dir.join(format!("temporal_{t}.png")),
            Some(Colormap::Heat),
        )?;
        prev = Some(map);
    }
    println!("state resets every {z} frames; outputs in {}", out_dir.display());
    Ok(())
}
