//! Tangent cones as limits of dilations, the nearest-point multifunction and
//! the conic approximation exponent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::exponents::{fit_line, ExponentFit};
use crate::metrics::hausdorff_points;
use crate::multifunctions::MultifunctionGraph;
use crate::sets::{NearestIndex, Point, PointCloud};

/// A closed cone given by its unit directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePresentation {
    pub dim: usize,
    pub directions: Vec<Point>,
    pub cluster_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeConfig {
    pub t0: f64,
    pub gamma: f64,
    pub steps: usize,
}

impl Default for ConeConfig {
    fn default() -> Self {
        ConeConfig {
            t0: 0.5,
            gamma: 0.7,
            steps: 16,
        }
    }
}

impl ConeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(invalid("t0 must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid("gamma must lie in (0, 1)"));
        }
        if self.steps < 5 {
            return Err(invalid(format!(
                "need at least 5 steps, got {}",
                self.steps
            )));
        }
        Ok(())
    }
}

/// Per-step diagnostics of the dilation schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeStep {
    pub t: f64,
    /// Samples of `E` with `0.5 t <= |x - a| <= 2 t`.
    pub samples: usize,
    /// Too few samples, or the dilated resolution exceeds half the annulus
    /// inner radius.
    pub resolution_limited: bool,
    /// Hausdorff distance between this and the previous dilated annulus set.
    pub drift: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentCone {
    pub cone: ConePresentation,
    /// `a` is farther than the resolution from `E`; the cone is empty.
    pub outside_closure: bool,
    /// No sample of `E` near `a`; the cone is `{0}`.
    pub isolated: bool,
    pub steps: Vec<ConeStep>,
}

const MIN_SAMPLES: usize = 3;

/// `(E - a) / t` with resolution and window rescaled.
pub fn dilate(e: &PointCloud, a: &Point, t: f64) -> Result<PointCloud> {
    check_dim(e.dim(), a.dim())?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!(
            "dilation factor must be positive, got {t}"
        )));
    }
    let pts = e
        .iter()
        .map(|x| Point(x.0.iter().zip(&a.0).map(|(xi, ai)| (xi - ai) / t).collect()))
        .collect();
    PointCloud::new(
        e.dim(),
        pts,
        e.resolution() / t,
        (e.window_radius() + a.norm()) / t,
    )
}

fn unit(v: Vec<f64>) -> Point {
    let n = crate::sets::norm(&v);
    Point(v.into_iter().map(|c| c / n).collect())
}

fn mean_direction(members: &[&Point]) -> Point {
    let dim = members[0].dim();
    let mut s = vec![0.0; dim];
    for m in members {
        for (acc, v) in s.iter_mut().zip(&m.0) {
            *acc += v;
        }
    }
    unit(s)
}

/// Greedy clustering of unit vectors, representatives renormalized.
fn cluster_directions(dirs: &[Point], tol: f64) -> Vec<Point> {
    let mut clusters: Vec<Vec<&Point>> = Vec::new();
    for d in dirs {
        match clusters.iter_mut().find(|c| c[0].dist(d) <= tol) {
            Some(c) => c.push(d),
            None => clusters.push(vec![d]),
        }
    }
    clusters.iter().map(|c| mean_direction(c)).collect()
}

/// Peano tangent cone of `E` at `a`.
///
/// For `t_k = t0 gamma^k` the unit directions of samples in the annulus
/// `0.5 t_k <= |x - a| <= 2 t_k` are harvested. The directions of the
/// deepest usable step are clustered; a cluster is kept when it can be
/// followed back through at least half of the tail steps `k >= steps / 2`.
pub fn tangent_cone(e: &PointCloud, a: &Point, cfg: &ConeConfig) -> Result<TangentCone> {
    check_dim(e.dim(), a.dim())?;
    cfg.validate()?;
    let res = e.resolution();
    let index = NearestIndex::new(e.dim(), e.points());
    let empty = |outside, isolated, steps, tol| TangentCone {
        cone: ConePresentation {
            dim: e.dim(),
            directions: Vec::new(),
            cluster_tol: tol,
        },
        outside_closure: outside,
        isolated,
        steps,
    };
    if index.dist(&a.0) > res {
        return Ok(empty(true, false, Vec::new(), 0.05));
    }

    let ts: Vec<f64> = (0..cfg.steps)
        .map(|k| cfg.t0 * cfg.gamma.powi(k as i32))
        .collect();
    let harvested: Vec<(Vec<Point>, Vec<Point>)> = ts
        .par_iter()
        .map(|&t| {
            let mut dilated = Vec::new();
            let mut dirs = Vec::new();
            for i in index.within(&a.0, 2.0 * t) {
                let v: Vec<f64> = e.points()[i]
                    .0
                    .iter()
                    .zip(&a.0)
                    .map(|(x, y)| x - y)
                    .collect();
                let r = crate::sets::norm(&v);
                if r >= 0.5 * t {
                    dilated.push(Point(v.iter().map(|c| c / t).collect()));
                    dirs.push(Point(v.iter().map(|c| c / r).collect()));
                }
            }
            (dilated, dirs)
        })
        .collect();

    let drifts: Vec<Option<f64>> = (0..ts.len())
        .into_par_iter()
        .map(|k| {
            if k == 0 || harvested[k].0.is_empty() || harvested[k - 1].0.is_empty() {
                None
            } else {
                Some(hausdorff_points(
                    e.dim(),
                    &harvested[k - 1].0,
                    &harvested[k].0,
                ))
            }
        })
        .collect();

    let steps: Vec<ConeStep> = ts
        .iter()
        .zip(&harvested)
        .zip(drifts)
        .map(|((&t, (_, dirs)), drift)| ConeStep {
            t,
            samples: dirs.len(),
            resolution_limited: dirs.len() < MIN_SAMPLES || res / t > 0.5,
            drift,
        })
        .collect();

    let valid: Vec<usize> = (0..steps.len())
        .filter(|&k| !steps[k].resolution_limited)
        .collect();
    let Some(&deepest) = valid.last() else {
        let isolated = steps.iter().all(|s| s.samples == 0);
        return Ok(empty(false, isolated, steps, 0.05));
    };
    let cluster_tol = (3.0 * res / ts[deepest]).min(0.05);
    let mut tail: Vec<usize> = valid
        .iter()
        .copied()
        .filter(|&k| k >= cfg.steps / 2)
        .collect();
    if tail.is_empty() {
        tail = valid.clone();
    }

    let candidates = cluster_directions(&harvested[deepest].1, cluster_tol);
    let needed = tail.len().div_ceil(2);
    let directions = candidates
        .into_iter()
        .filter(|c| {
            // follow the direction back through the schedule; it may rotate
            // slowly, so the reference is updated at each matched step
            let mut current = c.clone();
            let mut hits = 0;
            for &k in tail.iter().rev() {
                let dirs = &harvested[k].1;
                let near: Vec<&Point> = dirs
                    .iter()
                    .filter(|d| d.dist(&current) <= cluster_tol)
                    .collect();
                if !near.is_empty() {
                    hits += 1;
                    current = mean_direction(&near);
                }
            }
            hits >= needed
        })
        .collect();

    Ok(TangentCone {
        cone: ConePresentation {
            dim: e.dim(),
            directions,
            cluster_tol,
        },
        outside_closure: false,
        isolated: false,
        steps,
    })
}

/// Graph of `m(x) = {y ∈ M : |x - y| = d(x, M)}` over the inputs `xs`,
/// computed up to the resolution of `M`.
pub fn nearest_point_multifunction(m: &PointCloud, xs: &[Point]) -> Result<MultifunctionGraph> {
    if m.is_empty() {
        return Err(Error::EmptySet("nearest points of an empty set".into()));
    }
    for x in xs {
        check_dim(m.dim(), x.dim())?;
    }
    let res = m.resolution();
    let index = NearestIndex::new(m.dim(), m.points());
    let graph: Vec<Point> = xs
        .par_iter()
        .flat_map_iter(|x| {
            let d = index.dist(&x.0);
            index
                .within(&x.0, d + res)
                .into_iter()
                .map(|i| Point(x.0.iter().chain(&m.points()[i].0).copied().collect()))
                .collect::<Vec<_>>()
        })
        .collect();
    let cloud = PointCloud::from_points(2 * m.dim(), graph, res)?;
    MultifunctionGraph::new(m.dim(), m.dim(), cloud, res)
}

/// Points `s v` for every direction `v` and `0 <= s <= r`, spaced `spacing`.
fn cone_ball(cone: &ConePresentation, r: f64, spacing: f64) -> Vec<Point> {
    let count = (r / spacing).ceil() as usize;
    let mut out = vec![Point::origin(cone.dim)];
    for v in &cone.directions {
        for i in 1..=count {
            let s = (i as f64 * spacing).min(r);
            out.push(Point(v.0.iter().map(|c| c * s).collect()));
        }
    }
    out
}

/// Fits `dist_H(E ∩ B(r), V ∩ B(r)) ≈ c r^α` at the origin, where `V` is the
/// tangent cone of `E` at 0.
pub fn conic_exponent(e: &PointCloud, radii: &[f64], cfg: &ConeConfig) -> Result<ExponentFit> {
    if radii.len() < 5 {
        return Err(invalid("need at least 5 radii"));
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("radii must be positive and strictly decreasing"));
    }
    let origin = Point::origin(e.dim());
    let tc = tangent_cone(e, &origin, cfg)?;
    if tc.outside_closure {
        return Err(Error::OutsideDomain { point: origin.0 });
    }
    let res = e.resolution();
    let dists: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            let er: Vec<Point> = e.iter().filter(|p| p.norm() <= r).cloned().collect();
            let vr = cone_ball(&tc.cone, r, res / 2.0);
            hausdorff_points(e.dim(), &er, &vr)
        })
        .collect();
    if dists.iter().all(|&d| d < 3.0 * res) {
        return Err(Error::ConeDetected);
    }
    let pairs: Vec<(f64, f64)> = radii
        .iter()
        .zip(&dists)
        .filter(|(_, d)| **d > 0.0 && d.is_finite())
        .map(|(r, d)| (r.ln(), d.ln()))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::FitRejected(
            "fewer than two positive distances".into(),
        ));
    }
    let line = fit_line(&pairs);
    Ok(ExponentFit {
        exponent: line.slope,
        constant: line.intercept.exp(),
        window: (*radii.last().unwrap(), radii[0]),
        bins: radii.len(),
        max_residual: line.max_residual,
        envelope: pairs,
    })
}
