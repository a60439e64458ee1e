//! NFoV piloting: score candidate viewing angles on a saliency map, then
//! link per-frame candidates into a trajectory with bounded angular
//! velocity via dynamic programming.

use crate::error::{Error, Result};
use crate::eval::great_circle;
use crate::sphere::{render_nfov, NFovSpec};
use crate::tensor::EquirectMap;

const PI: f64 = std::f64::consts::PI;

/// Viewport size used when averaging saliency inside a candidate window.
/// Fixed so scoring cost does not depend on the field of view; the mean
/// converges with resolution well below the scoring noise.
const SCORE_SAMPLES: usize = 64;

/// Candidate viewing angles plus the viewport they are scored with.
#[derive(Debug, Clone)]
pub struct CandidateGrid {
    centers: Vec<(f64, f64)>,
    fov: f64,
}

impl CandidateGrid {
    pub fn new(centers: Vec<(f64, f64)>, fov: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Argument("candidate grid is empty".into()));
        }
        if !(fov > 0.0 && fov < PI) {
            return Err(Error::Argument(format!(
                "viewport fov must lie in (0, pi), got {fov}"
            )));
        }
        let mut deduped: Vec<(f64, f64)> = Vec::with_capacity(centers.len());
        for c in centers {
            if !deduped
                .iter()
                .any(|d| (d.0 - c.0).abs() < 1e-12 && (d.1 - c.1).abs() < 1e-12)
            {
                deduped.push(c);
            }
        }
        Ok(CandidateGrid {
            centers: deduped,
            fov,
        })
    }

    /// Regular grid: longitude every `lon_step_deg` over [-180, 180),
    /// latitude every `lat_step_deg` over [-lat_max_deg, lat_max_deg].
    pub fn regular(lon_step_deg: f64, lat_step_deg: f64, lat_max_deg: f64, fov: f64) -> Result<Self> {
        if lon_step_deg <= 0.0 || lat_step_deg <= 0.0 {
            return Err(Error::Argument("grid steps must be positive".into()));
        }
        let mut centers = Vec::new();
        let mut lat = -lat_max_deg;
        while lat <= lat_max_deg + 1e-9 {
            let mut lon = -180.0f64;
            while lon < 180.0 - 1e-9 {
                centers.push((lon.to_radians(), lat.to_radians()));
                lon += lon_step_deg;
            }
            lat += lat_step_deg;
        }
        CandidateGrid::new(centers, fov)
    }

    pub fn centers(&self) -> &[(f64, f64)] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn fov(&self) -> f64 {
        self.fov
    }
}

impl Default for CandidateGrid {
    /// 10-degree grid over latitudes [-45, 45] with 90-degree viewports.
    fn default() -> Self {
        CandidateGrid::regular(10.0, 10.0, 45.0, PI / 2.0).expect("default grid is valid")
    }
}

/// Mean saliency inside each candidate's viewport.
///
/// The mean is taken over the viewport's solid angle: gnomonic samples are
/// weighted by the projection Jacobian (1 + u^2 + v^2)^(-3/2), otherwise
/// content at the window border would count several times more than content
/// at its center.
pub fn score_viewangles(sal: &EquirectMap, grid: &CandidateGrid) -> Result<Vec<f64>> {
    if sal.channels() != 1 {
        return Err(Error::Shape(format!(
            "scoring needs a [1, q, p] map, got {} channels",
            sal.channels()
        )));
    }
    score_viewangles_at(sal, grid, SCORE_SAMPLES)
}

/// Scoring core with an explicit sampling resolution; the mean converges
/// quickly with resolution, which the tests pin at 32 vs 128 samples.
pub(crate) fn score_viewangles_at(
    sal: &EquirectMap,
    grid: &CandidateGrid,
    samples: usize,
) -> Result<Vec<f64>> {
    // weights depend only on the tangent grid, shared across candidates
    let half = (grid.fov() / 2.0).tan();
    let mut weights = vec![0.0f64; samples * samples];
    let mut weight_sum = 0.0f64;
    for j in 0..samples {
        let v = half * ((2 * j + 1) as f64 / samples as f64 - 1.0);
        for i in 0..samples {
            let u = half * ((2 * i + 1) as f64 / samples as f64 - 1.0);
            let w = (1.0 + u * u + v * v).powf(-1.5);
            weights[j * samples + i] = w;
            weight_sum += w;
        }
    }

    let mut scores = Vec::with_capacity(grid.len());
    for &(lon, lat) in grid.centers() {
        let spec = NFovSpec::new(lon, lat, grid.fov(), grid.fov(), samples, samples)?;
        let window = render_nfov(sal, &spec)?;
        let acc: f64 = window
            .data()
            .iter()
            .zip(&weights)
            .map(|(&v, &w)| v as f64 * w)
            .sum();
        scores.push(acc / weight_sum);
    }
    Ok(scores)
}

/// One chosen viewpoint per frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub candidate: usize,
    pub lon: f64,
    pub lat: f64,
    pub score: f64,
}

/// Linked viewpoint path with its accumulated score.
#[derive(Debug, Clone)]
pub struct ViewpointTrajectory {
    pub steps: Vec<TrajectoryStep>,
    pub total: f64,
}

/// Maximizes the summed per-frame score subject to a hard great-circle step
/// bound `d_max` between consecutive viewpoints. Exact dynamic program; ties
/// break toward the smallest candidate index.
pub fn link_trajectory(
    grid: &CandidateGrid,
    scores: &[Vec<f64>],
    d_max: f64,
) -> Result<ViewpointTrajectory> {
    if scores.is_empty() {
        return Err(Error::Argument("need scores for at least one frame".into()));
    }
    if d_max <= 0.0 {
        return Err(Error::Infeasible(format!(
            "step bound must be positive, got {d_max}"
        )));
    }
    let n = grid.len();
    for (t, frame) in scores.iter().enumerate() {
        if frame.len() != n {
            return Err(Error::Argument(format!(
                "frame {t} scores {} candidates, grid has {n}",
                frame.len()
            )));
        }
    }

    // pairwise feasibility
    let centers = grid.centers();
    let mut feasible = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..n {
            if great_circle(centers[i], centers[j]) <= d_max + 1e-12 {
                feasible[j].push(i);
            }
        }
    }

    let frames = scores.len();
    let mut best = vec![vec![f64::NEG_INFINITY; n]; frames];
    let mut parent = vec![vec![usize::MAX; n]; frames];
    best[0].clone_from_slice(&scores[0]);
    for t in 1..frames {
        for j in 0..n {
            let mut b = f64::NEG_INFINITY;
            let mut arg = usize::MAX;
            for &i in &feasible[j] {
                // strict improvement keeps the smallest index on ties
                if best[t - 1][i] > b {
                    b = best[t - 1][i];
                    arg = i;
                }
            }
            if arg != usize::MAX {
                best[t][j] = b + scores[t][j];
                parent[t][j] = arg;
            }
        }
        if best[t].iter().all(|v| v.is_infinite()) {
            return Err(Error::Infeasible(format!(
                "no candidate pair within {d_max} rad between frames {} and {t}",
                t - 1
            )));
        }
    }

    let mut end = 0usize;
    for j in 1..n {
        if best[frames - 1][j] > best[frames - 1][end] {
            end = j;
        }
    }
    if best[frames - 1][end].is_infinite() {
        return Err(Error::Infeasible("no feasible trajectory".into()));
    }

    let mut order = vec![end];
    for t in (1..frames).rev() {
        let prev = parent[t][*order.last().unwrap()];
        order.push(prev);
    }
    order.reverse();
    let steps: Vec<TrajectoryStep> = order
        .iter()
        .enumerate()
        .map(|(t, &c)| TrajectoryStep {
            candidate: c,
            lon: centers[c].0,
            lat: centers[c].1,
            score: scores[t][c],
        })
        .collect();
    Ok(ViewpointTrajectory {
        total: best[frames - 1][end],
        steps,
    })
}
