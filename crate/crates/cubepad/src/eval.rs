//! Ground-truth heatmap synthesis from viewpoint trajectories and the
//! AUC-Judd, AUC-Borji and Pearson-CC saliency metrics.
//!
//! Heatmaps aggregate viewpoint-centered Gaussians measured in great-circle
//! degrees (sigma defaults to 5), truncated to the 45-degree disc that a
//! 90-degree viewport covers. The binary fixation mask keeps pixels above
//! mean + 3 stddev of the heatmap. All metric statistics accumulate in f64.

use std::io::BufRead;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::EquirectMap;

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

/// Default Gaussian width in great-circle degrees.
pub const DEFAULT_SIGMA_DEG: f64 = 5.0;
/// Kernel truncation radius: half the 90-degree viewport.
pub const KERNEL_CUTOFF_DEG: f64 = 45.0;
/// Default number of random negative splits for AUC-Borji.
pub const DEFAULT_BORJI_SPLITS: usize = 100;

/// One recorded viewing direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewpoint {
    pub frame: usize,
    /// Longitude in radians, [-pi, pi).
    pub lon: f64,
    /// Latitude in radians, [-pi/2, pi/2].
    pub lat: f64,
}

impl Viewpoint {
    pub fn new(frame: usize, lon: f64, lat: f64) -> Result<Self> {
        if !(-PI..PI).contains(&lon) || !(-PI / 2.0..=PI / 2.0).contains(&lat) {
            return Err(Error::Argument(format!(
                "viewpoint ({lon}, {lat}) outside [-pi, pi) x [-pi/2, pi/2]"
            )));
        }
        Ok(Viewpoint { frame, lon, lat })
    }
}

/// JSON-lines record for trajectory files; angles in degrees on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViewpointRecord {
    pub frame: usize,
    pub lon_deg: f64,
    pub lat_deg: f64,
    #[serde(default)]
    pub viewer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl ViewpointRecord {
    pub fn to_viewpoint(&self) -> Result<Viewpoint> {
        let mut lon = self.lon_deg.to_radians();
        // normalize into [-pi, pi)
        lon = (lon + PI).rem_euclid(TAU) - PI;
        Viewpoint::new(self.frame, lon, self.lat_deg.to_radians())
    }
}

/// Reads a JSON-lines trajectory file; blank lines are skipped.
pub fn read_trajectory(path: &Path) -> Result<Vec<ViewpointRecord>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut records = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ViewpointRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
        records.push(rec);
    }
    Ok(records)
}

pub fn write_trajectory(path: &Path, records: &[ViewpointRecord]) -> Result<()> {
    let mut out = String::new();
    for rec in records {
        out.push_str(
            &serde_json::to_string(rec).map_err(|e| Error::Internal(format!("serialize: {e}")))?,
        );
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Great-circle angle between two (lon, lat) pairs, in radians.
pub fn great_circle(a: (f64, f64), b: (f64, f64)) -> f64 {
    let va = dir3(a.0, a.1);
    let vb = dir3(b.0, b.1);
    let dot = va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2];
    let cx = va[1] * vb[2] - va[2] * vb[1];
    let cy = va[2] * vb[0] - va[0] * vb[2];
    let cz = va[0] * vb[1] - va[1] * vb[0];
    let cross = (cx * cx + cy * cy + cz * cz).sqrt();
    cross.atan2(dot)
}

fn dir3(lon: f64, lat: f64) -> [f64; 3] {
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat]
}

/// Aggregates viewpoint-centered Gaussian kernels (angular distance in
/// degrees, truncated to the viewport disc) and max-normalizes to [0, 1].
pub fn gt_heatmap(vps: &[Viewpoint], p: usize, q: usize, sigma_deg: f64) -> Result<EquirectMap> {
    if vps.is_empty() {
        return Err(Error::Argument("heatmap needs at least one viewpoint".into()));
    }
    if sigma_deg <= 0.0 {
        return Err(Error::Argument(format!(
            "gaussian width must be positive, got {sigma_deg}"
        )));
    }
    let cutoff = KERNEL_CUTOFF_DEG.to_radians();
    let inv_two_sigma2 = 1.0 / (2.0 * sigma_deg * sigma_deg);
    let mut acc = vec![0.0f64; q * p];
    for vp in vps {
        let vdir = dir3(vp.lon, vp.lat);
        for y in 0..q {
            let lat = (0.5 - (y as f64 + 0.5) / q as f64) * PI;
            // rows further than the cutoff in latitude alone cannot intersect
            // the kernel disc
            if (lat - vp.lat).abs() > cutoff {
                continue;
            }
            let (sin_lat, cos_lat) = lat.sin_cos();
            for x in 0..p {
                let lon = ((x as f64 + 0.5) / p as f64 - 0.5) * TAU;
                let (sin_lon, cos_lon) = lon.sin_cos();
                let d = [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat];
                let dot = d[0] * vdir[0] + d[1] * vdir[1] + d[2] * vdir[2];
                let ang = dot.clamp(-1.0, 1.0).acos();
                if ang > cutoff {
                    continue;
                }
                let deg = ang.to_degrees();
                acc[y * p + x] += (-deg * deg * inv_two_sigma2).exp();
            }
        }
    }
    let max = acc.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::Degenerate("heatmap is identically zero".into()));
    }
    let data: Vec<f32> = acc.iter().map(|&v| (v / max) as f32).collect();
    EquirectMap::from_parts(1, q, p, data)
}

/// Binary fixation mask: pixels above the heatmap mean + 3 stddev.
#[derive(Debug, Clone)]
pub struct FixationMask {
    map: EquirectMap,
    positives: usize,
}

impl FixationMask {
    pub fn new(map: EquirectMap) -> Result<Self> {
        let positives = map.plane(0).iter().filter(|&&v| v > 0.0).count();
        if positives == 0 {
            return Err(Error::Degenerate("fixation mask has no positives".into()));
        }
        Ok(FixationMask { map, positives })
    }

    pub fn map(&self) -> &EquirectMap {
        &self.map
    }

    pub fn positives(&self) -> usize {
        self.positives
    }

    pub fn is_fixation(&self, idx: usize) -> bool {
        self.map.plane(0)[idx] > 0.0
    }

    pub fn len(&self) -> usize {
        self.map.tensor().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Thresholds a heatmap at mean + 3 stddev (population statistics).
pub fn binarize_gt(h: &EquirectMap) -> Result<FixationMask> {
    if h.channels() != 1 {
        return Err(Error::Shape("binarization needs a single-channel map".into()));
    }
    let n = h.tensor().len() as f64;
    let mut sum = 0.0f64;
    let mut sum2 = 0.0f64;
    for &v in h.plane(0) {
        sum += v as f64;
        sum2 += (v as f64) * (v as f64);
    }
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    if var == 0.0 {
        return Err(Error::Degenerate("constant map has no threshold".into()));
    }
    let threshold = mean + 3.0 * var.sqrt();
    let data: Vec<f32> = h
        .plane(0)
        .iter()
        .map(|&v| if (v as f64) > threshold { 1.0 } else { 0.0 })
        .collect();
    FixationMask::new(EquirectMap::from_parts(1, h.height(), h.width(), data)?)
}

fn check_metric_inputs(pred: &EquirectMap, fix: &FixationMask) -> Result<()> {
    if pred.channels() != 1 {
        return Err(Error::Shape("prediction must be single-channel".into()));
    }
    if pred.tensor().dims() != fix.map().tensor().dims() {
        return Err(Error::Shape(format!(
            "prediction dims {:?} vs mask dims {:?}",
            pred.tensor().dims(),
            fix.map().tensor().dims()
        )));
    }
    if !pred.tensor().is_finite() {
        return Err(Error::Data("prediction contains non-finite values".into()));
    }
    Ok(())
}

fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        area += (x1 - x0) * (y0 + y1) * 0.5;
    }
    area
}

/// AUC with fixation-value thresholds: positives are the mask pixels, the
/// negative pool is every other pixel. Thresholds sweep the distinct
/// prediction values at fixations; anchors (0,0) and (1,1) complete the
/// curve. Invariant under strictly monotone transforms of the prediction.
pub fn auc_judd(pred: &EquirectMap, fix: &FixationMask) -> Result<f64> {
    check_metric_inputs(pred, fix)?;
    let n = pred.tensor().len();
    let n_fix = fix.positives();
    if n_fix == 0 {
        return Err(Error::Argument("need at least one fixation".into()));
    }
    if n_fix == n {
        return Err(Error::Argument(
            "all pixels are fixations; no negative pool".into(),
        ));
    }
    let plane = pred.plane(0);
    let mut fix_vals: Vec<f32> = Vec::with_capacity(n_fix);
    let mut neg_vals: Vec<f32> = Vec::with_capacity(n - n_fix);
    for (idx, &v) in plane.iter().enumerate() {
        if fix.is_fixation(idx) {
            fix_vals.push(v);
        } else {
            neg_vals.push(v);
        }
    }
    // descending sweep over distinct fixation values
    fix_vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    neg_vals.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut points = vec![(0.0f64, 0.0f64)];
    let mut fi = 0usize; // count of fixations >= threshold
    let mut ni = 0usize;
    let mut i = 0usize;
    while i < fix_vals.len() {
        let t = fix_vals[i];
        while fi < fix_vals.len() && fix_vals[fi] >= t {
            fi += 1;
        }
        while ni < neg_vals.len() && neg_vals[ni] >= t {
            ni += 1;
        }
        let tpr = fi as f64 / fix_vals.len() as f64;
        let fpr = ni as f64 / neg_vals.len() as f64;
        points.push((fpr, tpr));
        // skip duplicates of this threshold
        while i < fix_vals.len() && fix_vals[i] == t {
            i += 1;
        }
    }
    points.push((1.0, 1.0));
    Ok(trapezoid_area(&points))
}

/// AUC with uniformly sampled negatives: per split, |fixations| pixel
/// locations are drawn uniformly (with replacement) as the negative set and
/// a 100-step threshold sweep over the min-max-normalized prediction is
/// integrated; the result is the mean over splits. Fully determined by the
/// seed.
pub fn auc_borji(
    pred: &EquirectMap,
    fix: &FixationMask,
    n_splits: usize,
    seed: u64,
) -> Result<f64> {
    check_metric_inputs(pred, fix)?;
    if n_splits == 0 {
        return Err(Error::Argument("need at least one split".into()));
    }
    let n = pred.tensor().len();
    let n_fix = fix.positives();
    if n_fix == 0 {
        return Err(Error::Argument("need at least one fixation".into()));
    }

    // min-max normalize; a flat prediction becomes all-zero
    let plane = pred.plane(0);
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for &v in plane {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let range = hi - lo;
    let norm: Vec<f32> = if range <= 0.0 {
        vec![0.0; n]
    } else {
        plane.iter().map(|&v| (v - lo) / range).collect()
    };

    let fix_vals: Vec<f32> = (0..n).filter(|&i| fix.is_fixation(i)).map(|i| norm[i]).collect();

    const THRESHOLD_STEPS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0f64;
    for _ in 0..n_splits {
        let negatives: Vec<f32> = (0..n_fix).map(|_| norm[rng.gen_range(0..n)]).collect();
        let mut points = vec![(0.0f64, 0.0f64)];
        for step in (1..=THRESHOLD_STEPS).rev() {
            let t = step as f32 / THRESHOLD_STEPS as f32;
            let tp = fix_vals.iter().filter(|&&v| v >= t).count();
            let fp = negatives.iter().filter(|&&v| v >= t).count();
            points.push((fp as f64 / n_fix as f64, tp as f64 / n_fix as f64));
        }
        points.push((1.0, 1.0));
        acc += trapezoid_area(&points);
    }
    Ok(acc / n_splits as f64)
}

/// Pearson linear correlation of the two maps' pixel vectors.
pub fn cc(pred: &EquirectMap, gt: &EquirectMap) -> Result<f64> {
    if pred.channels() != 1 || gt.channels() != 1 {
        return Err(Error::Shape("correlation needs single-channel maps".into()));
    }
    if pred.tensor().dims() != gt.tensor().dims() {
        return Err(Error::Shape(format!(
            "prediction dims {:?} vs ground truth {:?}",
            pred.tensor().dims(),
            gt.tensor().dims()
        )));
    }
    let n = pred.tensor().len() as f64;
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in pred.plane(0).iter().zip(gt.plane(0)) {
        let (a, b) = (a as f64, b as f64);
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
    }
    let var_a = saa - sa * sa / n;
    let var_b = sbb - sb * sb / n;
    if var_a <= 0.0 || var_b <= 0.0 {
        return Err(Error::Degenerate("zero-variance input to correlation".into()));
    }
    Ok((sab - sa * sb / n) / (var_a * var_b).sqrt())
}

/// Scores of one frame.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrameMetrics {
    pub frame: usize,
    pub auc_judd: f64,
    pub auc_borji: f64,
    pub cc: f64,
}

/// Per-frame scores plus sequence means.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub frames: Vec<FrameMetrics>,
    pub mean_auc_judd: f64,
    pub mean_auc_borji: f64,
    pub mean_cc: f64,
}

/// Evaluates predictions against GT heatmaps synthesized from viewpoints,
/// one prediction per distinct frame index (ascending).
pub fn evaluate_sequence(
    preds: &[EquirectMap],
    records: &[ViewpointRecord],
    sigma_deg: f64,
    borji_splits: usize,
    seed: u64,
) -> Result<MetricsReport> {
    if records.is_empty() {
        return Err(Error::Argument("trajectory holds no viewpoints".into()));
    }
    let mut frames: Vec<usize> = records.iter().map(|r| r.frame).collect();
    frames.sort_unstable();
    frames.dedup();
    if frames.len() != preds.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} annotated frames",
            preds.len(),
            frames.len()
        )));
    }
    let mut out = Vec::with_capacity(frames.len());
    let (mut mj, mut mb, mut mc) = (0.0f64, 0.0f64, 0.0f64);
    for (i, &frame) in frames.iter().enumerate() {
        let vps: Vec<Viewpoint> = records
            .iter()
            .filter(|r| r.frame == frame)
            .map(|r| r.to_viewpoint())
            .collect::<Result<_>>()?;
        let pred = &preds[i];
        let gt = gt_heatmap(&vps, pred.width(), pred.height(), sigma_deg)?;
        let mask = binarize_gt(&gt)?;
        let judd = auc_judd(pred, &mask)?;
        let borji = auc_borji(pred, &mask, borji_splits, seed.wrapping_add(frame as u64))?;
        let corr = cc(pred, &gt)?;
        mj += judd;
        mb += borji;
        mc += corr;
        out.push(FrameMetrics {
            frame,
            auc_judd: judd,
            auc_borji: borji,
            cc: corr,
        });
    }
    let n = out.len() as f64;
    Ok(MetricsReport {
        frames: out,
        mean_auc_judd: mj / n,
        mean_auc_borji: mb / n,
        mean_cc: mc / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_map(q: usize, p: usize, seed: u64) -> EquirectMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f32> = (0..q * p).map(|_| rng.gen_range(0.0..1.0)).collect();
        EquirectMap::from_parts(1, q, p, data).unwrap()
    }

    fn random_mask(q: usize, p: usize, count: usize, seed: u64) -> FixationMask {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0.0f32; q * p];
        let mut placed = 0usize;
        while placed < count {
            let idx = rng.gen_range(0..q * p);
            if data[idx] == 0.0 {
                data[idx] = 1.0;
                placed += 1;
            }
        }
        FixationMask::new(EquirectMap::from_parts(1, q, p, data).unwrap()).unwrap()
    }

    #[test]
    fn heatmap_peak_and_symmetry() {
        let vp = Viewpoint::new(0, 0.0, 0.0).unwrap();
        let (p, q) = (256usize, 128usize);
        let h = gt_heatmap(&[vp], p, q, DEFAULT_SIGMA_DEG).unwrap();
        let plane = h.plane(0);
        let (argmax, max) = plane
            .iter()
            .enumerate()
            .fold((0, f32::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert_eq!(max, 1.0);
        let (y, x) = (argmax / p, argmax % p);
        assert!(x == 127 || x == 128, "x = {x}");
        assert!(y == 63 || y == 64, "y = {y}");

        // longitude reflection symmetry about the viewpoint column
        for yy in 0..q {
            for d in 1..20 {
                let a = h.get(0, yy, 127 - d);
                let b = h.get(0, yy, 128 + d);
                assert!((a - b).abs() <= 1e-5, "y={yy} d={d}: {a} vs {b}");
            }
        }
        // everything within [0, 1]
        assert!(plane.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn heatmap_antipodal_viewpoints_have_two_unit_peaks() {
        let a = Viewpoint::new(0, 0.0, 0.0).unwrap();
        let b = Viewpoint::new(0, -PI, 0.0).unwrap();
        let h = gt_heatmap(&[a, b], 256, 128, DEFAULT_SIGMA_DEG).unwrap();
        let plane = h.plane(0);
        let peaks = plane.iter().filter(|&&v| v >= 1.0 - 1e-6).count();
        assert!(peaks >= 2, "peaks = {peaks}");
        // truncated kernels: no overlap, both maxima are exactly 1 after
        // normalization
        let col_a = 127usize;
        let col_b = 0usize;
        let row = 63usize;
        assert!(plane[row * 256 + col_a] > 0.9);
        assert!(plane[row * 256 + col_b] > 0.9);
    }

    #[test]
    fn heatmap_rejects_empty_and_bad_sigma() {
        assert!(matches!(
            gt_heatmap(&[], 64, 32, 5.0),
            Err(Error::Argument(_))
        ));
        let vp = Viewpoint::new(0, 0.0, 0.0).unwrap();
        assert!(gt_heatmap(&[vp], 64, 32, 0.0).is_err());
    }

    #[test]
    fn polar_viewpoint_widens_in_pixel_space() {
        let near_pole = Viewpoint::new(0, 0.0, 80f64.to_radians()).unwrap();
        let h = gt_heatmap(&[near_pole], 256, 128, DEFAULT_SIGMA_DEG).unwrap();
        // the top rows should light up over a wide range of columns
        let row = 8usize; // lat ~ 78 degrees
        let lit = (0..256).filter(|&x| h.get(0, row, x) > 0.05).count();
        assert!(lit > 60, "lit = {lit}");
    }

    #[test]
    fn binarize_one_percent_spike_fixture() {
        let (q, p) = (100usize, 200usize);
        let mut data = vec![0.0f32; q * p];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut placed = 0;
        while placed < 200 {
            let idx = rng.gen_range(0..q * p);
            if data[idx] == 0.0 {
                data[idx] = 1.0;
                placed += 1;
            }
        }
        let h = EquirectMap::from_parts(1, q, p, data.clone()).unwrap();
        let mask = binarize_gt(&h).unwrap();
        // mu = 0.01, sigma = sqrt(0.0099), threshold ~ 0.308 < 1
        let mu = 0.01f64;
        let sigma = (0.0099f64).sqrt();
        assert!((mu + 3.0 * sigma - 0.3085).abs() < 1e-3);
        assert_eq!(mask.positives(), 200);
        for (i, &v) in data.iter().enumerate() {
            assert_eq!(mask.is_fixation(i), v == 1.0);
        }
    }

    #[test]
    fn binarize_scale_invariance_and_degenerate() {
        let h = gt_heatmap(
            &[Viewpoint::new(0, 1.0, 0.3).unwrap()],
            128,
            64,
            DEFAULT_SIGMA_DEG,
        )
        .unwrap();
        let mask1 = binarize_gt(&h).unwrap();
        let doubled =
            EquirectMap::from_parts(1, 64, 128, h.plane(0).iter().map(|v| v * 2.0).collect())
                .unwrap();
        let mask2 = binarize_gt(&doubled).unwrap();
        assert_eq!(mask1.map().plane(0), mask2.map().plane(0));

        let flat = EquirectMap::from_parts(1, 4, 8, vec![0.5; 32]).unwrap();
        assert!(matches!(binarize_gt(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn binarized_gaussian_is_disc_containing_peak() {
        let h = gt_heatmap(
            &[Viewpoint::new(0, 0.0, 0.0).unwrap()],
            256,
            128,
            DEFAULT_SIGMA_DEG,
        )
        .unwrap();
        let mask = binarize_gt(&h).unwrap();
        assert!(mask.positives() > 10);
        let peak = h
            .plane(0)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(mask.is_fixation(peak));
    }

    #[test]
    fn judd_perfect_constant_and_separation() {
        let (q, p) = (32usize, 64usize);
        let mask = random_mask(q, p, 50, 3);
        // perfect separation: fixations strictly higher than everything else
        let data: Vec<f32> = (0..q * p)
            .map(|i| if mask.is_fixation(i) { 0.9 } else { 0.1 })
            .collect();
        let pred = EquirectMap::from_parts(1, q, p, data).unwrap();
        assert_eq!(auc_judd(&pred, &mask).unwrap(), 1.0);

        let flat = EquirectMap::from_parts(1, q, p, vec![0.5; q * p]).unwrap();
        assert_eq!(auc_judd(&flat, &mask).unwrap(), 0.5);
    }

    #[test]
    fn judd_chance_level_on_random_predictions() {
        let (q, p) = (256usize, 512usize);
        let mask = random_mask(q, p, 10_000, 11);
        for seed in 0..3u64 {
            let pred = uniform_map(q, p, seed);
            let score = auc_judd(&pred, &mask).unwrap();
            assert!((score - 0.5).abs() <= 0.02, "seed {seed}: {score}");
        }
    }

    #[test]
    fn judd_monotone_invariance_is_exact() {
        let (q, p) = (32usize, 64usize);
        let mask = random_mask(q, p, 100, 5);
        let pred = uniform_map(q, p, 9);
        let base = auc_judd(&pred, &mask).unwrap();
        let squashed = EquirectMap::from_parts(
            1,
            q,
            p,
            pred.plane(0).iter().map(|v| (5.0 * v).tanh()).collect(),
        )
        .unwrap();
        assert_eq!(auc_judd(&squashed, &mask).unwrap(), base);
    }

    #[test]
    fn judd_rejects_degenerate_masks() {
        let (q, p) = (8usize, 16usize);
        let pred = uniform_map(q, p, 1);
        let all = FixationMask::new(EquirectMap::from_parts(1, q, p, vec![1.0; q * p]).unwrap())
            .unwrap();
        assert!(matches!(auc_judd(&pred, &all), Err(Error::Argument(_))));
        assert!(FixationMask::new(EquirectMap::from_parts(1, q, p, vec![0.0; q * p]).unwrap())
            .is_err());
    }

    #[test]
    fn borji_separation_constant_and_determinism() {
        // sparse mask: uniformly sampled negatives rarely hit fixations, so
        // perfect separation stays above 0.99
        let (q, p) = (64usize, 128usize);
        let mask = random_mask(q, p, 40, 21);
        let data: Vec<f32> = (0..q * p)
            .map(|i| if mask.is_fixation(i) { 0.95 } else { 0.05 })
            .collect();
        let pred = EquirectMap::from_parts(1, q, p, data).unwrap();
        let sep = auc_borji(&pred, &mask, 50, 7).unwrap();
        assert!(sep >= 0.99, "sep = {sep}");

        let flat = EquirectMap::from_parts(1, q, p, vec![0.4; q * p]).unwrap();
        let chance = auc_borji(&flat, &mask, 50, 7).unwrap();
        assert!((chance - 0.5).abs() <= 0.01, "chance = {chance}");

        let a = auc_borji(&pred, &mask, 25, 99).unwrap();
        let b = auc_borji(&pred, &mask, 25, 99).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let c = auc_borji(&pred, &mask, 25, 100).unwrap();
        assert_ne!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn borji_monotone_transform_within_tolerance() {
        let (q, p) = (64usize, 128usize);
        let mask = random_mask(q, p, 400, 33);
        let pred = uniform_map(q, p, 17);
        let base = auc_borji(&pred, &mask, DEFAULT_BORJI_SPLITS, 5).unwrap();
        let transformed = EquirectMap::from_parts(
            1,
            q,
            p,
            pred.plane(0).iter().map(|v| v * v * v).collect(),
        )
        .unwrap();
        let moved = auc_borji(&transformed, &mask, DEFAULT_BORJI_SPLITS, 5).unwrap();
        assert!((base - moved).abs() <= 0.01, "{base} vs {moved}");
    }

    #[test]
    fn cc_basic_laws() {
        let x = uniform_map(32, 64, 2);
        assert!((cc(&x, &x).unwrap() - 1.0).abs() <= 1e-12);

        let scaled = EquirectMap::from_parts(
            1,
            32,
            64,
            x.plane(0).iter().map(|v| 2.5 * v + 0.3).collect(),
        )
        .unwrap();
        assert!((cc(&x, &scaled).unwrap() - 1.0).abs() <= 1e-9);
        let negated = EquirectMap::from_parts(
            1,
            32,
            64,
            x.plane(0).iter().map(|v| -1.5 * v + 0.1).collect(),
        )
        .unwrap();
        assert!((cc(&x, &negated).unwrap() + 1.0).abs() <= 1e-9);

        // symmetry
        let y = uniform_map(32, 64, 3);
        assert!((cc(&x, &y).unwrap() - cc(&y, &x).unwrap()).abs() <= 1e-15);

        let flat = EquirectMap::from_parts(1, 32, 64, vec![0.5; 32 * 64]).unwrap();
        assert!(matches!(cc(&x, &flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn cc_independent_maps_near_zero() {
        let x = uniform_map(256, 512, 40);
        let y = uniform_map(256, 512, 41);
        let c = cc(&x, &y).unwrap();
        assert!(c.abs() <= 0.01, "cc = {c}");
    }

    #[test]
    fn trajectory_roundtrip_and_grouping() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.jsonl");
        let records = vec![
            ViewpointRecord {
                frame: 0,
                lon_deg: 10.0,
                lat_deg: -5.0,
                viewer: "a".into(),
                score: None,
            },
            ViewpointRecord {
                frame: 1,
                lon_deg: -170.0,
                lat_deg: 30.0,
                viewer: "b".into(),
                score: Some(0.5),
            },
        ];
        write_trajectory(&path, &records).unwrap();
        let back = read_trajectory(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].frame, 1);
        assert_eq!(back[1].score, Some(0.5));
        let vp = back[0].to_viewpoint().unwrap();
        assert!((vp.lon - 10f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn self_evaluation_saturates_metrics() {
        let records = vec![
            ViewpointRecord {
                frame: 0,
                lon_deg: 20.0,
                lat_deg: 10.0,
                viewer: String::new(),
                score: None,
            },
            ViewpointRecord {
                frame: 0,
                lon_deg: -60.0,
                lat_deg: -20.0,
                viewer: String::new(),
                score: None,
            },
        ];
        let vps: Vec<Viewpoint> = records.iter().map(|r| r.to_viewpoint().unwrap()).collect();
        let gt = gt_heatmap(&vps, 128, 64, DEFAULT_SIGMA_DEG).unwrap();
        let report = evaluate_sequence(&[gt], &records, DEFAULT_SIGMA_DEG, 25, 3).unwrap();
        assert!(report.mean_auc_judd >= 0.99);
        assert!((report.mean_cc - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn great_circle_sanity() {
        assert!((great_circle((0.0, 0.0), (PI / 2.0, 0.0)) - PI / 2.0).abs() < 1e-12);
        assert!((great_circle((0.0, 0.0), (0.0, PI / 2.0)) - PI / 2.0).abs() < 1e-12);
        assert!(great_circle((1.0, 0.5), (1.0, 0.5)) < 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng; // disambiguate from the proptest prelude re-export

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            /// Scores stay inside their documented ranges for arbitrary
            /// finite inputs.
            #[test]
            fn metric_scores_stay_in_range(
                seed in any::<u64>(),
                fix_count in 1usize..60,
                scale in 0.1f32..50.0,
            ) {
                let (q, p) = (16usize, 32usize);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pred = EquirectMap::from_parts(
                    1, q, p,
                    (0..q * p).map(|_| rng.gen_range(-1.0f32..1.0) * scale).collect(),
                ).unwrap();
                let mut mask_data = vec![0.0f32; q * p];
                for _ in 0..fix_count {
                    mask_data[rng.gen_range(0..q * p)] = 1.0;
                }
                let mask = FixationMask::new(
                    EquirectMap::from_parts(1, q, p, mask_data).unwrap(),
                ).unwrap();
                let judd = auc_judd(&pred, &mask).unwrap();
                prop_assert!((0.0..=1.0).contains(&judd));
                let borji = auc_borji(&pred, &mask, 10, seed).unwrap();
                prop_assert!((0.0..=1.0).contains(&borji));
                let gt = EquirectMap::from_parts(
                    1, q, p,
                    (0..q * p).map(|_| rng.gen_range(0.0f32..1.0)).collect(),
                ).unwrap();
                if let Ok(c) = cc(&pred, &gt) {
                    prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&c));
                }
            }
        }
    }
}
