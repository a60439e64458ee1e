//! Command-line surface. Exit codes: 0 success, 1 data/processing error,
//! 2 usage error. Every command is deterministic given `--seed`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{report_csv, report_gnuplot, run_bench, BenchConfig};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_sequence, gt_heatmap, read_trajectory, write_trajectory, Viewpoint, ViewpointRecord,
    DEFAULT_BORJI_SPLITS, DEFAULT_SIGMA_DEG,
};
use crate::image_io::{image_export, image_import, Colormap};
use crate::loss::{flowgen, loss_total, FlowField, LossWeights};
use crate::nn::{
    forward_static, forward_temporal, generate_convlstm, generate_network, load_convlstm,
    load_network, save_convlstm, save_network, ForwardOptions, PipelineMode,
};
use crate::pilot::{link_trajectory, score_viewangles, CandidateGrid};
use crate::sphere::{cubemap_to_equirect, equirect_to_cubemap};
use crate::tensor::{CubeMap, EquirectMap, Tensor};

#[derive(Parser)]
#[command(
    name = "cubepad",
    version,
    about = "360-degree saliency toolkit: cubemap projections, cube-padded forward passes, \
             temporal losses, metrics, NFoV piloting, and padding benchmarks"
)]
struct Cli {
    /// RNG seed shared by all generators in the invocation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for frame-parallel work (1 = fully serial).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Stdout format for report-producing commands.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Cp,
    Zp,
    Equi,
    Overlap,
}

impl From<ModeArg> for PipelineMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Cp => PipelineMode::CubePad,
            ModeArg::Zp => PipelineMode::ZeroPad,
            ModeArg::Equi => PipelineMode::Equirect,
            ModeArg::Overlap => PipelineMode::Overlap,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Project an equirectangular image onto the six cube faces.
    Project(ProjectArgs),
    /// Render a cubemap back onto the equirectangular grid.
    Unproject(UnprojectArgs),
    /// Run the saliency pipeline over a directory of frames.
    Saliency(SaliencyArgs),
    /// Temporal losses over a directory of saliency maps and flow fields.
    Loss(LossArgs),
    /// Score predictions against trajectory-derived ground truth.
    Eval(EvalArgs),
    /// Link salient viewpoints into an NFoV trajectory.
    Pilot(PilotArgs),
    /// Throughput benchmark across padding/projection strategies.
    Bench(BenchArgs),
    /// Generate seeded toy network (and optional ConvLSTM) weights.
    GenWeights(GenWeightsArgs),
    /// Generate synthetic optical-flow fields.
    GenFlow(GenFlowArgs),
    /// Synthesize ground-truth heatmaps from a trajectory.
    GenGt(GenGtArgs),
}

#[derive(Args)]
struct ProjectArgs {
    /// Input equirectangular image (PNG, PFM or CPT1).
    #[arg(long)]
    input: PathBuf,
    /// Cube face width; defaults to p/4.
    #[arg(long)]
    face_width: Option<usize>,
    /// Output CPT1 file holding the [6, c, w, w] stack.
    #[arg(long)]
    output: PathBuf,
    /// Optionally also dump each face as PNG into this directory.
    #[arg(long)]
    png_dir: Option<PathBuf>,
}

#[derive(Args)]
struct UnprojectArgs {
    /// Input CPT1 cubemap.
    #[arg(long)]
    input: PathBuf,
    /// Output equirect width p (height is p/2).
    #[arg(long)]
    width: usize,
    /// Output image or CPT1 path.
    #[arg(long)]
    output: PathBuf,
    /// Colormap for single-channel PNG output.
    #[arg(long)]
    colormap: Option<String>,
}

#[derive(Args)]
struct SaliencyArgs {
    /// Directory of input frames (PNG/PFM/CPT1), processed in name order.
    #[arg(long)]
    frames: PathBuf,
    /// Network manifest JSON.
    #[arg(long)]
    net: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Engage the ConvLSTM pipeline with this sequence length.
    #[arg(long)]
    temporal: Option<usize>,
    /// ConvLSTM manifest (required with --temporal).
    #[arg(long)]
    lstm: Option<PathBuf>,
    /// Output directory for per-frame CPT1 + PNG maps.
    #[arg(long)]
    out: PathBuf,
    /// Colormap for the PNG outputs.
    #[arg(long)]
    colormap: Option<String>,
}

#[derive(Args)]
struct LossArgs {
    /// Directory of saliency maps (name order defines the sequence).
    #[arg(long)]
    maps: PathBuf,
    /// Directory of flow CPT1 files, one per consecutive pair.
    #[arg(long)]
    flows: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    lambda_r: f64,
    #[arg(long, default_value_t = 0.7)]
    lambda_s: f64,
    #[arg(long, default_value_t = 0.001)]
    lambda_m: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Sequence length recorded in the report.
    #[arg(long, default_value_t = 5)]
    z: usize,
    /// Write the JSON report here instead of stdout only.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of predicted maps, one per annotated frame (name order).
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth trajectory JSONL.
    #[arg(long)]
    gt: PathBuf,
    /// Expected prediction width; checked when given.
    #[arg(long)]
    width: Option<usize>,
    /// Expected prediction height; checked when given.
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SIGMA_DEG)]
    sigma_deg: f64,
    #[arg(long, default_value_t = DEFAULT_BORJI_SPLITS)]
    splits: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PilotArgs {
    /// Directory of saliency maps (multi-channel allowed with --class).
    #[arg(long)]
    saliency: PathBuf,
    #[arg(long, default_value_t = 90.0)]
    fov_deg: f64,
    #[arg(long, default_value_t = 10.0)]
    lon_step: f64,
    #[arg(long, default_value_t = 10.0)]
    lat_step: f64,
    #[arg(long, default_value_t = 45.0)]
    lat_max: f64,
    /// Hard bound on the per-frame viewpoint step, degrees.
    #[arg(long, default_value_t = 15.0)]
    dmax_deg: f64,
    /// Class channel to pilot on; multi-channel maps default to channel max.
    #[arg(long)]
    class: Option<usize>,
    /// Output trajectory JSONL.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated equirect widths.
    #[arg(long, value_delimiter = ',', default_values_t = vec![480usize, 960])]
    widths: Vec<usize>,
    /// Comma-separated modes.
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = vec![ModeArg::Zp, ModeArg::Cp, ModeArg::Equi, ModeArg::Overlap])]
    modes: Vec<ModeArg>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 3)]
    warmup: usize,
    /// Also measure the ConvLSTM pipelines.
    #[arg(long)]
    temporal: bool,
    /// Directory receiving report.json, report.csv (and report.gp).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit a gnuplot script next to the CSV.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct GenWeightsArgs {
    /// Channel chain, e.g. 3,8,8.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3usize, 8, 8])]
    channels: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 3)]
    kernel: usize,
    /// Also generate ConvLSTM weights at `classes` channels.
    #[arg(long)]
    lstm: bool,
    #[arg(long)]
    out: PathBuf,
    /// File stem for the manifests.
    #[arg(long, default_value = "net")]
    stem: String,
}

#[derive(Args)]
struct GenFlowArgs {
    #[arg(long, value_parser = ["constant", "rotation", "blob"])]
    pattern: String,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(long, default_value_t = 1)]
    frames: usize,
    #[arg(long, default_value_t = 1.0)]
    dx: f32,
    #[arg(long, default_value_t = 0.0)]
    dy: f32,
    /// Degrees of longitude per frame for the rotation pattern.
    #[arg(long, default_value_t = 3.0)]
    speed_deg: f64,
    /// Blob center and radius in pixels.
    #[arg(long, default_value_t = 0.0)]
    cx: f64,
    #[arg(long, default_value_t = 0.0)]
    cy: f64,
    #[arg(long, default_value_t = 8.0)]
    radius: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenGtArgs {
    /// Trajectory JSONL with per-frame viewpoints.
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long)]
    width: usize,
    /// Defaults to width/2.
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SIGMA_DEG)]
    sigma_deg: f64,
    #[arg(long)]
    out: PathBuf,
    /// Also write PNG previews.
    #[arg(long)]
    png: bool,
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    run_from(std::env::args().collect())
}

/// Testable entry point: parses the given argv and dispatches.
pub fn run_from(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let ctx = Ctx {
        seed: cli.seed,
        threads: cli.threads,
        format: cli.format,
    };
    let result = match cli.cmd {
        Cmd::Project(a) => cmd_project(&ctx, a),
        Cmd::Unproject(a) => cmd_unproject(&ctx, a),
        Cmd::Saliency(a) => cmd_saliency(&ctx, a),
        Cmd::Loss(a) => cmd_loss(&ctx, a),
        Cmd::Eval(a) => cmd_eval(&ctx, a),
        Cmd::Pilot(a) => cmd_pilot(&ctx, a),
        Cmd::Bench(a) => cmd_bench(&ctx, a),
        Cmd::GenWeights(a) => cmd_gen_weights(&ctx, a),
        Cmd::GenFlow(a) => cmd_gen_flow(&ctx, a),
        Cmd::GenGt(a) => cmd_gen_gt(&ctx, a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx {
    seed: u64,
    threads: usize,
    format: OutputFormat,
}

/// Files in `dir` with one of the given extensions, sorted by name. When
/// the directory holds CPT1 files, images are ignored — commands that emit
/// maps write a CPT1/PNG pair per frame, and only the exact one should feed
/// back into the pipeline.
fn collect_files(dir: &Path, exts: &[&str]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    for entry in entries {
        let path = entry?.path();
        if let Some(ext) = path.extension().and_then(|e| e.to_str()) {
            if exts.contains(&ext.to_ascii_lowercase().as_str()) {
                out.push(path);
            }
        }
    }
    if out
        .iter()
        .any(|p| p.extension().and_then(|e| e.to_str()) == Some("cpt"))
    {
        out.retain(|p| p.extension().and_then(|e| e.to_str()) == Some("cpt"));
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::Data(format!(
            "no {exts:?} files in {}",
            dir.display()
        )));
    }
    Ok(out)
}

/// Loads an equirect map from CPT1 ([c,q,p] or [q,p]) or an image file.
fn load_map(path: &Path) -> Result<EquirectMap> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("cpt") => {
            let t = Tensor::read_from(path)?;
            match t.dims() {
                [_, _, _] => EquirectMap::new(t),
                [h, w] => {
                    let (h, w) = (*h, *w);
                    EquirectMap::new(Tensor::new(vec![1, h, w], t.into_data())?)
                }
                d => Err(Error::Shape(format!(
                    "{}: expected a map, got dims {d:?}",
                    path.display()
                ))),
            }
        }
        _ => image_import(path),
    }
}

fn parse_colormap(s: &Option<String>) -> Result<Option<Colormap>> {
    Ok(match s {
        None => None,
        Some(s) => Some(Colormap::parse(s)?),
    })
}

fn print_report<T: serde::Serialize>(ctx: &Ctx, report: &T, csv: Option<String>) -> Result<()> {
    match ctx.format {
        OutputFormat::Json => {
            let json = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Internal(format!("serialize report: {e}")))?;
            println!("{json}");
        }
        OutputFormat::Csv => match csv {
            Some(csv) => print!("{csv}"),
            None => {
                return Err(Error::Argument(
                    "this command has no CSV representation".into(),
                ))
            }
        },
    }
    Ok(())
}

fn cmd_project(_ctx: &Ctx, a: ProjectArgs) -> Result<()> {
    let m = load_map(&a.input)?;
    let (q, p) = (m.height(), m.width());
    if p != 2 * q || p % 4 != 0 {
        return Err(Error::Argument(format!(
            "input must be canonical (p = 2q, p divisible by 4), got {p}x{q}"
        )));
    }
    let w = a.face_width.unwrap_or(p / 4);
    let cube = equirect_to_cubemap(&m, w)?;
    cube.tensor().write_to(&a.output)?;
    if let Some(dir) = a.png_dir {
        std::fs::create_dir_all(&dir)?;
        for (i, face) in crate::sphere::FaceId::ALL.iter().enumerate() {
            let mut data = Vec::with_capacity(cube.channels() * w * w);
            for ch in 0..cube.channels() {
                data.extend_from_slice(cube.face_plane(i, ch));
            }
            let t = Tensor::new(vec![cube.channels(), w, w], data)?;
            image_export(&t, &dir.join(format!("face_{}.png", face.letter())), None)?;
        }
    }
    println!(
        "projected {}x{} -> 6 x {}x{} faces into {}",
        p,
        q,
        w,
        w,
        a.output.display()
    );
    Ok(())
}

fn cmd_unproject(_ctx: &Ctx, a: UnprojectArgs) -> Result<()> {
    let t = Tensor::read_from(&a.input)?;
    let cube = CubeMap::new(t)?;
    if !a.width.is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "output width must be even, got {}",
            a.width
        )));
    }
    let m = cubemap_to_equirect(&cube, a.width, a.width / 2)?;
    match a.output.extension().and_then(|e| e.to_str()) {
        Some("cpt") => m.tensor().write_to(&a.output)?,
        _ => image_export(m.tensor(), &a.output, parse_colormap(&a.colormap)?)?,
    }
    println!(
        "unprojected 6 x {0}x{0} faces -> {1}x{2} into {3}",
        cube.width(),
        a.width,
        a.width / 2,
        a.output.display()
    );
    Ok(())
}

fn cmd_saliency(ctx: &Ctx, a: SaliencyArgs) -> Result<()> {
    let net = load_network(&a.net)?;
    let mode: PipelineMode = a.mode.into();
    let files = collect_files(&a.frames, &["png", "pfm", "cpt"])?;
    let frames: Vec<EquirectMap> = files.iter().map(|p| load_map(p)).collect::<Result<_>>()?;
    std::fs::create_dir_all(&a.out)?;
    let colormap = parse_colormap(&a.colormap)?;
    let opts = ForwardOptions::default();

    if mode == PipelineMode::Overlap {
        let p = frames[0].width();
        let w = p / 4;
        let w_o = (w as f64 * (opts.overlap_fov / 2.0).tan()
            / std::f64::consts::FRAC_PI_4.tan())
        .ceil() as usize;
        println!(
            "overlap faces: width {w_o} (base {w}, fov {:.0} deg)",
            opts.overlap_fov.to_degrees()
        );
    }

    let maps: Vec<EquirectMap> = match a.temporal {
        Some(z) => {
            let lstm_path = a.lstm.as_ref().ok_or_else(|| {
                Error::Argument("--temporal requires --lstm <manifest>".into())
            })?;
            let lstm = load_convlstm(lstm_path)?;
            forward_temporal(&frames, &net, &lstm, z, mode, &opts)?
        }
        None => {
            if ctx.threads > 1 {
                use rayon::prelude::*;
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(ctx.threads)
                    .build()
                    .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
                pool.install(|| {
                    frames
                        .par_iter()
                        .map(|f| forward_static(f, &net, mode, &opts))
                        .collect::<Result<Vec<_>>>()
                })?
            } else {
                frames
                    .iter()
                    .map(|f| forward_static(f, &net, mode, &opts))
                    .collect::<Result<Vec<_>>>()?
            }
        }
    };

    for (file, map) in files.iter().zip(&maps) {
        let stem = file
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("frame");
        map.tensor().write_to(&a.out.join(format!("{stem}_sal.cpt")))?;
        image_export(map.tensor(), &a.out.join(format!("{stem}_sal.png")), colormap)?;
    }
    println!("wrote {} saliency maps to {}", maps.len(), a.out.display());
    Ok(())
}

fn cmd_loss(ctx: &Ctx, a: LossArgs) -> Result<()> {
    let weights = LossWeights {
        lambda_r: a.lambda_r,
        lambda_s: a.lambda_s,
        lambda_m: a.lambda_m,
        epsilon: a.epsilon,
        z: a.z,
    };
    weights.validate()?;
    let map_files = collect_files(&a.maps, &["cpt", "png", "pfm"])?;
    let maps: Vec<EquirectMap> = map_files.iter().map(|p| load_map(p)).collect::<Result<_>>()?;
    let flow_files = collect_files(&a.flows, &["cpt"])?;
    if flow_files.len() != maps.len() - 1 {
        return Err(Error::Data(format!(
            "{} maps need {} flows, found {}",
            maps.len(),
            maps.len() - 1,
            flow_files.len()
        )));
    }
    let flows: Vec<FlowField> = flow_files
        .iter()
        .map(|p| Tensor::read_from(p).and_then(FlowField::new))
        .collect::<Result<_>>()?;
    let breakdown = loss_total(&maps, &flows, &weights)?;

    #[derive(serde::Serialize)]
    struct LossReport {
        weights: LossWeights,
        breakdown: crate::loss::LossBreakdown,
    }
    let report = LossReport {
        weights,
        breakdown,
    };
    if let Some(path) = &a.out {
        std::fs::write(
            path,
            serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Internal(format!("serialize: {e}")))?,
        )?;
    }
    print_report(ctx, &report, None)
}

fn cmd_eval(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let pred_files = collect_files(&a.pred, &["cpt", "png", "pfm"])?;
    let preds: Vec<EquirectMap> = pred_files.iter().map(|p| load_map(p)).collect::<Result<_>>()?;
    if let (Some(w), Some(h)) = (a.width, a.height) {
        for m in &preds {
            if m.width() != w || m.height() != h {
                return Err(Error::Data(format!(
                    "prediction is {}x{}, expected {w}x{h}",
                    m.width(),
                    m.height()
                )));
            }
        }
    }
    let records = read_trajectory(&a.gt)?;
    if records.is_empty() {
        return Err(Error::Data(format!(
            "{}: trajectory holds no viewpoints",
            a.gt.display()
        )));
    }
    let report = evaluate_sequence(&preds, &records, a.sigma_deg, a.splits, ctx.seed)?;
    let mut csv = String::from("frame,auc_judd,auc_borji,cc\n");
    for f in &report.frames {
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            f.frame, f.auc_judd, f.auc_borji, f.cc
        ));
    }
    if let Some(path) = &a.out {
        std::fs::write(
            path,
            serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Internal(format!("serialize: {e}")))?,
        )?;
    }
    print_report(ctx, &report, Some(csv))
}

fn cmd_pilot(_ctx: &Ctx, a: PilotArgs) -> Result<()> {
    let files = collect_files(&a.saliency, &["cpt", "png", "pfm"])?;
    let grid = CandidateGrid::regular(
        a.lon_step,
        a.lat_step,
        a.lat_max,
        a.fov_deg.to_radians(),
    )?;
    let mut scores = Vec::with_capacity(files.len());
    for file in &files {
        let map = load_map(file)?;
        let single = select_channel(&map, a.class)?;
        scores.push(score_viewangles(&single, &grid)?);
    }
    let d_max = a.dmax_deg.to_radians();
    let traj = link_trajectory(&grid, &scores, d_max)?;
    let records: Vec<ViewpointRecord> = traj
        .steps
        .iter()
        .enumerate()
        .map(|(t, s)| ViewpointRecord {
            frame: t,
            lon_deg: s.lon.to_degrees(),
            lat_deg: s.lat.to_degrees(),
            viewer: "pilot".into(),
            score: Some(s.score),
        })
        .collect();
    write_trajectory(&a.out, &records)?;
    println!(
        "linked {} frames, total score {:.6}, wrote {}",
        traj.steps.len(),
        traj.total,
        a.out.display()
    );
    Ok(())
}

/// Multi-channel maps reduce to one channel: an explicit class channel or
/// the per-pixel channel max.
fn select_channel(map: &EquirectMap, class: Option<usize>) -> Result<EquirectMap> {
    let (c, q, p) = (map.channels(), map.height(), map.width());
    match class {
        Some(k) => {
            if k >= c {
                return Err(Error::Argument(format!(
                    "class {k} out of range for {c}-channel map"
                )));
            }
            EquirectMap::from_parts(1, q, p, map.plane(k).to_vec())
        }
        None if c == 1 => Ok(map.clone()),
        None => {
            let mut out = map.plane(0).to_vec();
            for k in 1..c {
                for (o, &v) in out.iter_mut().zip(map.plane(k)) {
                    if v > *o {
                        *o = v;
                    }
                }
            }
            EquirectMap::from_parts(1, q, p, out)
        }
    }
}

fn cmd_bench(ctx: &Ctx, a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        widths: a.widths,
        modes: a.modes.into_iter().map(PipelineMode::from).collect(),
        reps: a.reps,
        warmup: a.warmup,
        threads: ctx.threads,
        temporal: a.temporal,
        seed: ctx.seed,
    };
    let report = run_bench(&cfg)?;
    let csv = report_csv(&report);
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Internal(format!("serialize: {e}")))?,
        )?;
        std::fs::write(dir.join("report.csv"), &csv)?;
        if a.plot {
            std::fs::write(dir.join("report.gp"), report_gnuplot(&report, "report.csv"))?;
        }
    }
    print_report(ctx, &report, Some(csv))
}

fn cmd_gen_weights(ctx: &Ctx, a: GenWeightsArgs) -> Result<()> {
    let net = generate_network(ctx.seed, &a.channels, a.classes, a.kernel)?;
    let manifest = save_network(&net, &a.out, &a.stem)?;
    println!("wrote {}", manifest.display());
    if a.lstm {
        let w = generate_convlstm(ctx.seed.wrapping_add(1), a.classes)?;
        let manifest = save_convlstm(&w, &a.out, &format!("{}_lstm", a.stem))?;
        println!("wrote {}", manifest.display());
    }
    Ok(())
}

fn cmd_gen_flow(_ctx: &Ctx, a: GenFlowArgs) -> Result<()> {
    if a.frames == 0 {
        return Err(Error::Argument("need at least one frame".into()));
    }
    std::fs::create_dir_all(&a.out)?;
    for t in 0..a.frames {
        let flow = match a.pattern.as_str() {
            "constant" => flowgen::constant(a.height, a.width, a.dx, a.dy),
            "rotation" => flowgen::rotation(a.height, a.width, a.speed_deg),
            "blob" => flowgen::blob(
                a.height,
                a.width,
                a.cx + t as f64 * a.dx as f64,
                a.cy + t as f64 * a.dy as f64,
                a.radius,
                a.dx,
                a.dy,
            ),
            other => return Err(Error::Argument(format!("unknown pattern '{other}'"))),
        };
        flow.tensor()
            .write_to(&a.out.join(format!("flow_{t:04}.cpt")))?;
    }
    println!("wrote {} flow fields to {}", a.frames, a.out.display());
    Ok(())
}

fn cmd_gen_gt(_ctx: &Ctx, a: GenGtArgs) -> Result<()> {
    let records = read_trajectory(&a.trajectory)?;
    if records.is_empty() {
        return Err(Error::Data(format!(
            "{}: trajectory holds no viewpoints",
            a.trajectory.display()
        )));
    }
    let q = a.height.unwrap_or(a.width / 2);
    std::fs::create_dir_all(&a.out)?;
    let mut frames: Vec<usize> = records.iter().map(|r| r.frame).collect();
    frames.sort_unstable();
    frames.dedup();
    for &frame in &frames {
        let vps: Vec<Viewpoint> = records
            .iter()
            .filter(|r| r.frame == frame)
            .map(|r| r.to_viewpoint())
            .collect::<Result<_>>()?;
        let h = gt_heatmap(&vps, a.width, q, a.sigma_deg)?;
        h.tensor()
            .write_to(&a.out.join(format!("gt_{frame:04}.cpt")))?;
        if a.png {
            image_export(
                h.tensor(),
                &a.out.join(format!("gt_{frame:04}.png")),
                Some(Colormap::Heat),
            )?;
        }
    }
    println!(
        "wrote {} ground-truth heatmaps to {}",
        frames.len(),
        a.out.display()
    );
    Ok(())
}
