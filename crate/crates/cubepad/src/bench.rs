//! Throughput harness comparing the padding/projection strategies on
//! synthetic frames with a fixed seeded toy network.
//!
//! The timed region is the forward pass only; frames and weights are built
//! beforehand. Modes are measured round-robin within each repetition so
//! machine drift spreads evenly across cells. Reported figures are medians
//! over the repetitions after the warmup rounds.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nn::{
    forward_static, forward_temporal, generate_convlstm, generate_network, ForwardOptions,
    PipelineMode,
};
use crate::tensor::EquirectMap;

/// Toy network shape used by every benchmark cell. Wide enough that the
/// convolution stack dominates the projection overhead, as it does for the
/// full-size backbones the comparison models.
const BENCH_CHANNELS: [usize; 4] = [3, 16, 16, 16];
const BENCH_CLASSES: usize = 4;
const BENCH_SEQUENCE: usize = 5;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Equirect widths p to measure (q = p/2).
    pub widths: Vec<usize>,
    pub modes: Vec<PipelineMode>,
    pub reps: usize,
    pub warmup: usize,
    pub threads: usize,
    /// Also measure the two ConvLSTM pipelines.
    pub temporal: bool,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            widths: vec![480, 960],
            modes: vec![
                PipelineMode::ZeroPad,
                PipelineMode::CubePad,
                PipelineMode::Equirect,
                PipelineMode::Overlap,
            ],
            reps: 20,
            warmup: 3,
            threads: 1,
            temporal: false,
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.widths.is_empty() {
            return Err(Error::Argument("no widths to benchmark".into()));
        }
        for &p in &self.widths {
            if p < 64 || p % 2 != 0 {
                return Err(Error::Argument(format!(
                    "benchmark widths must be even and >= 64, got {p}"
                )));
            }
        }
        if self.reps < 3 {
            return Err(Error::Argument("need at least 3 repetitions".into()));
        }
        if self.threads == 0 {
            return Err(Error::Argument("thread count must be >= 1".into()));
        }
        if self.modes.is_empty() && !self.temporal {
            return Err(Error::Argument("no modes to benchmark".into()));
        }
        Ok(())
    }
}

/// Median/min/max seconds per frame and FPS of one (mode, width) cell.
#[derive(Debug, Clone, Serialize)]
pub struct BenchCell {
    pub mode: String,
    pub width: usize,
    pub face_width: usize,
    /// Pixels entering the layer chain per frame.
    pub pixels: usize,
    pub median_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub fps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub cells: Vec<BenchCell>,
    pub threads: usize,
    pub reps: usize,
    pub warmup: usize,
    pub seed: u64,
    /// Build flavor stamp; orderings are only meaningful within one flavor.
    pub profile: String,
    /// Analytic overlap/cubemap per-face pixel area ratio at 120 degrees.
    pub overlap_area_ratio: f64,
}

/// Deterministic synthetic frame: smooth spherical blobs plus optional
/// uniform noise.
pub fn synthetic_frame(seed: u64, channels: usize, q: usize, p: usize, noise: f32) -> EquirectMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blob_count = 4usize;
    let blobs: Vec<(f64, f64, f64, f64)> = (0..blob_count)
        .map(|_| {
            (
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                rng.gen_range(-1.2f64..1.2),
                rng.gen_range(0.1f64..0.5),
                rng.gen_range(0.3f64..1.0),
            )
        })
        .collect();
    let mut data = vec![0.0f32; channels * q * p];
    for ch in 0..channels {
        let phase = ch as f64 * 0.7;
        for y in 0..q {
            let lat = (0.5 - (y as f64 + 0.5) / q as f64) * std::f64::consts::PI;
            let (sin_lat, cos_lat) = lat.sin_cos();
            for x in 0..p {
                let lon = ((x as f64 + 0.5) / p as f64 - 0.5) * std::f64::consts::TAU;
                let mut v = 0.25 + 0.1 * ((lon * 2.0 + phase).sin() * cos_lat);
                for &(blon, blat, bw, amp) in &blobs {
                    let (sin_b, cos_b) = blat.sin_cos();
                    let dot = cos_lat * cos_b * (lon - blon).cos() + sin_lat * sin_b;
                    let ang = dot.clamp(-1.0, 1.0).acos();
                    v += amp * (-ang * ang / (2.0 * bw * bw)).exp();
                }
                data[(ch * q + y) * p + x] = v.min(1.0) as f32;
            }
        }
    }
    if noise > 0.0 {
        for v in data.iter_mut() {
            *v = (*v + rng.gen_range(-noise..noise)).clamp(0.0, 1.0);
        }
    }
    EquirectMap::from_parts(channels, q, p, data).expect("synthetic frame shape is valid")
}

enum Workload {
    Static(PipelineMode),
    Temporal(PipelineMode),
}

impl Workload {
    fn label(&self) -> String {
        match self {
            Workload::Static(m) => m.label().to_string(),
            Workload::Temporal(m) => format!("{}_LSTM", m.label()),
        }
    }
}

fn trunk_pixels(mode: PipelineMode, p: usize) -> (usize, usize) {
    let w = p / 4;
    match mode {
        PipelineMode::CubePad | PipelineMode::ZeroPad => (w, 6 * w * w),
        PipelineMode::Equirect => (p, p * p / 2),
        PipelineMode::Overlap => {
            let w_o = (w as f64 * 60f64.to_radians().tan()).ceil() as usize;
            (w_o, 6 * w_o * w_o)
        }
    }
}

/// Runs the configured benchmark matrix and reports per-cell statistics.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let net = generate_network(cfg.seed, &BENCH_CHANNELS, BENCH_CLASSES, 3)?;
    let lstm = generate_convlstm(cfg.seed.wrapping_add(1), BENCH_CLASSES)?;
    let opts = ForwardOptions::default();

    struct Cell {
        work: Workload,
        width: usize,
        frames: Vec<EquirectMap>,
        times: Vec<f64>,
    }

    let mut cells = Vec::new();
    for &p in &cfg.widths {
        let q = p / 2;
        let static_frames: Vec<EquirectMap> = (0..cfg.threads)
            .map(|i| synthetic_frame(cfg.seed.wrapping_add(i as u64), 3, q, p, 0.05))
            .collect();
        for &mode in &cfg.modes {
            cells.push(Cell {
                work: Workload::Static(mode),
                width: p,
                frames: static_frames.clone(),
                times: Vec::with_capacity(cfg.reps),
            });
        }
        if cfg.temporal {
            let seq: Vec<EquirectMap> = (0..BENCH_SEQUENCE)
                .map(|i| synthetic_frame(cfg.seed.wrapping_add(100 + i as u64), 3, q, p, 0.05))
                .collect();
            for mode in [PipelineMode::CubePad, PipelineMode::Equirect] {
                cells.push(Cell {
                    work: Workload::Temporal(mode),
                    width: p,
                    frames: seq.clone(),
                    times: Vec::with_capacity(cfg.reps),
                });
            }
        }
    }

    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    // rotate the starting cell each round so cache carry-over from the
    // previous cell spreads evenly instead of always hitting the same one
    let n_cells = cells.len();
    for round in 0..cfg.warmup + cfg.reps {
        for offset in 0..n_cells {
            let cell = &mut cells[(round + offset) % n_cells];
            let dt = match &cell.work {
                Workload::Static(mode) => {
                    let start = Instant::now();
                    match &pool {
                        None => {
                            let out = forward_static(&cell.frames[0], &net, *mode, &opts)?;
                            std::hint::black_box(&out);
                        }
                        Some(pool) => {
                            use rayon::prelude::*;
                            let outs: Vec<_> = pool.install(|| {
                                cell.frames
                                    .par_iter()
                                    .map(|f| forward_static(f, &net, *mode, &opts))
                                    .collect::<Result<Vec<_>>>()
                            })?;
                            std::hint::black_box(&outs);
                        }
                    }
                    start.elapsed().as_secs_f64() / cfg.threads.max(1) as f64
                }
                Workload::Temporal(mode) => {
                    let start = Instant::now();
                    let outs =
                        forward_temporal(&cell.frames, &net, &lstm, BENCH_SEQUENCE, *mode, &opts)?;
                    std::hint::black_box(&outs);
                    start.elapsed().as_secs_f64() / cell.frames.len() as f64
                }
            };
            if round >= cfg.warmup {
                cell.times.push(dt);
            }
        }
    }

    let mut out_cells = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut times = cell.times;
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if times.len() % 2 == 1 {
            times[times.len() / 2]
        } else {
            0.5 * (times[times.len() / 2 - 1] + times[times.len() / 2])
        };
        let mode = match &cell.work {
            Workload::Static(m) | Workload::Temporal(m) => *m,
        };
        let (face_width, pixels) = trunk_pixels(mode, cell.width);
        out_cells.push(BenchCell {
            mode: cell.work.label(),
            width: cell.width,
            face_width,
            pixels,
            median_s: median,
            min_s: times[0],
            max_s: *times.last().unwrap(),
            fps: 1.0 / median,
        });
    }

    Ok(BenchReport {
        cells: out_cells,
        threads: cfg.threads,
        reps: cfg.reps,
        warmup: cfg.warmup,
        seed: cfg.seed,
        profile: if cfg!(debug_assertions) {
            "debug".into()
        } else {
            "release".into()
        },
        overlap_area_ratio: (60f64.to_radians().tan() / 45f64.to_radians().tan()).powi(2),
    })
}

/// CSV table, one row per cell.
pub fn report_csv(report: &BenchReport) -> String {
    let mut out = String::from("mode,p,face_width,pixels,median_s,min_s,max_s,fps\n");
    for c in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.3}\n",
            c.mode, c.width, c.face_width, c.pixels, c.median_s, c.min_s, c.max_s, c.fps
        ));
    }
    out
}

/// Minimal gnuplot script plotting FPS against resolution per mode from the
/// CSV emitted by [`report_csv`].
pub fn report_gnuplot(report: &BenchReport, csv_path: &str) -> String {
    let mut modes: Vec<String> = report.cells.iter().map(|c| c.mode.clone()).collect();
    modes.dedup();
    let mut plot_terms = Vec::new();
    for mode in &modes {
        plot_terms.push(format!(
            "'{csv_path}' using 2:8 every ::0 with linespoints title '{mode}' \
             smooth unique"
        ));
    }
    format!(
        "set datafile separator ','\n\
         set key top right\n\
         set xlabel 'equirect width p'\n\
         set ylabel 'frames per second'\n\
         set title 'forward-pass throughput ({} threads)'\n\
         plot {}\n",
        report.threads,
        plot_terms.join(", \\\n     ")
    )
}
