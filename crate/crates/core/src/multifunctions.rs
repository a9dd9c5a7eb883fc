//! Multifunctions `F: R^m -> P(R^n)` represented by a sampled graph.
//!
//! Sections are read off the graph through a slab: `F(x)` is the set of
//! `y` such that some graph sample `(x', y)` has `|x' - x| <= slab`. Set
//! comparisons between sections are made at tolerance
//! `tau = 2 (slab + resolution)`.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, invalid, Error, Result};
use crate::metrics::{directed_hausdorff, hausdorff_points, kuratowski_dist};
use crate::sets::{dist, norm, sample, ImplicitSetSpec, NearestIndex, Point, PointCloud};

#[derive(Clone, Debug)]
pub struct MultifunctionGraph {
    m: usize,
    n: usize,
    graph: PointCloud,
    slab: f64,
    x_index: NearestIndex,
}

impl MultifunctionGraph {
    pub fn new(m: usize, n: usize, graph: PointCloud, slab: f64) -> Result<MultifunctionGraph> {
        if m == 0 || n == 0 {
            return Err(invalid("multifunction dimensions must be positive"));
        }
        check_dim(m + n, graph.dim())?;
        if !(slab >= graph.resolution()) || !slab.is_finite() {
            return Err(invalid(format!(
                "slab {slab} is smaller than the graph resolution {}",
                graph.resolution()
            )));
        }
        let xs: Vec<Point> = graph.iter().map(|p| Point(p.0[..m].to_vec())).collect();
        let x_index = NearestIndex::new(m, &xs);
        Ok(MultifunctionGraph {
            m,
            n,
            graph,
            slab,
            x_index,
        })
    }

    /// Samples the graph from an implicit description in `R^{m+n}`.
    pub fn sample(
        m: usize,
        n: usize,
        spec: &ImplicitSetSpec,
        grid_step: f64,
        slab: f64,
        seed: u64,
    ) -> Result<MultifunctionGraph> {
        MultifunctionGraph::new(m, n, sample(spec, grid_step, seed)?, slab)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &PointCloud {
        &self.graph
    }

    pub fn slab(&self) -> f64 {
        self.slab
    }

    pub fn resolution(&self) -> f64 {
        self.graph.resolution()
    }

    /// Comparison tolerance `2 (slab + resolution)` for sampled sections.
    pub fn tolerance(&self) -> f64 {
        2.0 * (self.slab + self.graph.resolution())
    }

    fn x_of<'a>(&self, p: &'a Point) -> &'a [f64] {
        &p.0[..self.m]
    }

    fn y_of(&self, p: &Point) -> Point {
        Point(p.0[self.m..].to_vec())
    }

    fn section_points(&self, x: &[f64]) -> Vec<Point> {
        self.x_index
            .within(x, self.slab)
            .into_iter()
            .map(|i| self.y_of(&self.graph.points()[i]))
            .collect()
    }

    fn output_cloud(&self, dim: usize, points: Vec<Point>) -> PointCloud {
        PointCloud::new(
            dim,
            points,
            self.graph.resolution(),
            self.graph.window_radius(),
        )
        .expect("projections of graph samples stay inside the graph window")
    }

    /// True when some graph sample lies within `slab` of the window boundary,
    /// i.e. values may have been cut off by the sampling window.
    pub fn touches_window(&self, p: &Point) -> bool {
        p.norm() > self.graph.window_radius() - self.slab
    }
}

/// `F(x)`: outputs of graph samples whose input lies within the slab of `x`.
pub fn section(f: &MultifunctionGraph, x: &Point) -> Result<PointCloud> {
    check_dim(f.m, x.dim())?;
    Ok(f.output_cloud(f.n, f.section_points(&x.0)))
}

/// Keeps the first point of every cell of a grid with spacing `cell`.
pub(crate) fn dedup_cells(points: impl IntoIterator<Item = Point>, cell: f64) -> Vec<Point> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in points {
        let key: Vec<i64> = p.0.iter().map(|c| (c / cell).floor() as i64).collect();
        if seen.insert(key) {
            out.push(p);
        }
    }
    out
}

/// `dom F`: projection of the graph onto the inputs, deduplicated at the
/// graph resolution.
pub fn domain(f: &MultifunctionGraph) -> PointCloud {
    let xs = f.graph.iter().map(|p| Point(f.x_of(p).to_vec()));
    f.output_cloud(f.m, dedup_cells(xs, f.graph.resolution()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreImageMode {
    /// `F(x) = F(a)`
    Strong,
    /// `F(x) ⊂ F(a)`
    Lower,
    /// `F(x) ⊃ F(a)`
    Upper,
    /// `F(x) ∩ F(a) ≠ ∅`
    Weak,
}

fn min_set_distance(dim: usize, a: &[Point], b: &[Point]) -> f64 {
    let ib = NearestIndex::new(dim, b);
    a.iter()
        .map(|p| ib.dist(&p.0))
        .fold(f64::INFINITY, f64::min)
}

/// Pre-image of `F(a)` under the chosen mode, at tolerance
/// [`MultifunctionGraph::tolerance`]. Candidates are `a` followed by the
/// sampled domain; the result keeps that order.
pub fn pre_image(f: &MultifunctionGraph, a: &Point, mode: PreImageMode) -> Result<PointCloud> {
    check_dim(f.m, a.dim())?;
    let target = f.section_points(&a.0);
    if target.is_empty() {
        return Err(Error::OutsideDomain { point: a.0.clone() });
    }
    let tau = f.tolerance();
    let n = f.n;
    let candidates = dedup_cells(
        std::iter::once(a.clone()).chain(f.graph.iter().map(|p| Point(f.x_of(p).to_vec()))),
        f.graph.resolution(),
    );
    let keep: Vec<bool> = candidates
        .par_iter()
        .map(|x| {
            let fx = f.section_points(&x.0);
            if fx.is_empty() {
                return false;
            }
            let d = match mode {
                PreImageMode::Strong => hausdorff_points(n, &fx, &target),
                PreImageMode::Lower => directed_hausdorff(n, &fx, &target),
                PreImageMode::Upper => directed_hausdorff(n, &target, &fx),
                PreImageMode::Weak => min_set_distance(n, &fx, &target),
            };
            d <= tau
        })
        .collect();
    let pts = candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(x, k)| k.then_some(x))
        .collect();
    Ok(f.output_cloud(f.m, pts))
}

pub fn pre_image_strong(f: &MultifunctionGraph, a: &Point) -> Result<PointCloud> {
    pre_image(f, a, PreImageMode::Strong)
}

pub fn pre_image_lower(f: &MultifunctionGraph, a: &Point) -> Result<PointCloud> {
    pre_image(f, a, PreImageMode::Lower)
}

pub fn pre_image_upper(f: &MultifunctionGraph, a: &Point) -> Result<PointCloud> {
    pre_image(f, a, PreImageMode::Upper)
}

pub fn pre_image_weak(f: &MultifunctionGraph, a: &Point) -> Result<PointCloud> {
    pre_image(f, a, PreImageMode::Weak)
}

/// `(Γ_F)_y = {x : y ∈ F(x)}` over the sampled domain.
pub fn pre_image_point(f: &MultifunctionGraph, y: &Point) -> Result<PointCloud> {
    check_dim(f.n, y.dim())?;
    let tau = f.tolerance();
    let candidates = domain(f).into_points();
    let keep: Vec<bool> = candidates
        .par_iter()
        .map(|x| {
            f.section_points(&x.0)
                .iter()
                .map(|v| v.dist(y))
                .fold(f64::INFINITY, f64::min)
                <= tau
        })
        .collect();
    let pts = candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(x, k)| k.then_some(x))
        .collect();
    Ok(f.output_cloud(f.m, pts))
}

/// `δ(x, y) = d(y, F(x))`; `+inf` off the sampled domain.
pub fn delta(f: &MultifunctionGraph, x: &Point, y: &Point) -> Result<f64> {
    check_dim(f.m, x.dim())?;
    check_dim(f.n, y.dim())?;
    Ok(f.section_points(&x.0)
        .iter()
        .map(|v| v.dist(y))
        .fold(f64::INFINITY, f64::min))
}

/// `Δ_{F,G}(x, x') = max_{y ∈ G(x')} d(y, F(x))`.
pub fn delta_sup(
    f: &MultifunctionGraph,
    g: &MultifunctionGraph,
    x: &Point,
    x2: &Point,
) -> Result<f64> {
    check_dim(f.m, x.dim())?;
    check_dim(g.m, x2.dim())?;
    check_dim(f.n, g.n)?;
    let fx = f.section_points(&x.0);
    if fx.is_empty() {
        return Err(Error::EmptySet(format!("F(x) is empty at x = {:?}", x.0)));
    }
    let gx = g.section_points(&x2.0);
    if gx.is_empty() {
        return Err(Error::EmptySet(format!(
            "G(x') is empty at x' = {:?}",
            x2.0
        )));
    }
    Ok(directed_hausdorff(f.n, &gx, &fx))
}

/// `dist_H(F(x), G(x'))`; `+inf` when exactly one section is empty.
pub fn dh_field(
    f: &MultifunctionGraph,
    g: &MultifunctionGraph,
    x: &Point,
    x2: &Point,
) -> Result<f64> {
    check_dim(f.m, x.dim())?;
    check_dim(g.m, x2.dim())?;
    check_dim(f.n, g.n)?;
    Ok(hausdorff_points(
        f.n,
        &f.section_points(&x.0),
        &g.section_points(&x2.0),
    ))
}

/// `dist_K(F(x), G(x'))`; finite for empty sections as well.
pub fn dk_field(
    f: &MultifunctionGraph,
    g: &MultifunctionGraph,
    x: &Point,
    x2: &Point,
) -> Result<f64> {
    check_dim(f.n, g.n)?;
    kuratowski_dist(&section(f, x)?, &section(g, x2)?)
}

/// Radii `r0 * 2^-k` for `k = 0..=10`.
pub fn default_radii(r0: f64) -> Vec<f64> {
    (0..=10).map(|k| r0 * 0.5f64.powi(k)).collect()
}

/// Result of a Kuratowski limit probe.
#[derive(Clone, Debug, Serialize)]
pub struct KuratowskiLimit {
    pub points: PointCloud,
    /// Some graph sample near `a` touches the sampling window, so values may
    /// escape it and the limit is not trustworthy.
    pub truncated: bool,
    /// Number of nonempty annuli found around `a`.
    pub nonempty_annuli: usize,
    pub tolerance: f64,
}

struct LimitData {
    /// Outputs over the innermost nonempty annuli.
    inner_values: Vec<Point>,
    /// Inputs over the innermost nonempty annuli.
    inner_inputs: Vec<Point>,
    inner_radius: f64,
    truncated: bool,
    nonempty: usize,
}

const INNER_ANNULI: usize = 2;

fn limit_data(f: &MultifunctionGraph, a: &Point, radii: &[f64]) -> Result<LimitData> {
    check_dim(f.m, a.dim())?;
    if radii.len() < 2 {
        return Err(invalid("need at least two radii"));
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("radii must be positive and strictly decreasing"));
    }
    let r_in = *radii.last().unwrap();
    let mut annuli: Vec<Vec<&Point>> = vec![Vec::new(); radii.len() - 1];
    let mut truncated = false;
    for p in f.graph.iter() {
        let r = dist(f.x_of(p), &a.0);
        if r <= r_in || r > radii[0] {
            continue;
        }
        // annulus k is (radii[k+1], radii[k]]
        let k = radii.partition_point(|&rk| rk >= r) - 1;
        annuli[k].push(p);
        truncated |= f.touches_window(p);
    }
    let nonempty: Vec<usize> = (0..annuli.len())
        .filter(|&k| !annuli[k].is_empty())
        .collect();
    if nonempty.is_empty() {
        return Err(Error::IsolatedPoint { point: a.0.clone() });
    }
    let inner: Vec<&Point> = nonempty
        .iter()
        .rev()
        .take(INNER_ANNULI)
        .flat_map(|&k| annuli[k].iter().copied())
        .collect();
    Ok(LimitData {
        inner_values: inner.iter().map(|p| f.y_of(p)).collect(),
        inner_inputs: inner.iter().map(|p| Point(f.x_of(p).to_vec())).collect(),
        inner_radius: r_in,
        truncated,
        nonempty: nonempty.len(),
    })
}

/// Greedy clustering in input order; each cluster is represented by the
/// mean of its members.
pub(crate) fn cluster_means(points: &[Point], tol: f64) -> Vec<Point> {
    let mut seeds: Vec<&Point> = Vec::new();
    let mut sums: Vec<(Vec<f64>, usize)> = Vec::new();
    for p in points {
        match seeds.iter().position(|s| s.dist(p) <= tol) {
            Some(i) => {
                for (acc, v) in sums[i].0.iter_mut().zip(&p.0) {
                    *acc += v;
                }
                sums[i].1 += 1;
            }
            None => {
                seeds.push(p);
                sums.push((p.0.clone(), 1));
            }
        }
    }
    sums.into_iter()
        .map(|(s, c)| Point(s.into_iter().map(|v| v / c as f64).collect()))
        .collect()
}

fn limsup_points(f: &MultifunctionGraph, data: &LimitData, tol: f64) -> Vec<Point> {
    let _ = f;
    cluster_means(&data.inner_values, tol)
}

/// Kuratowski upper limit of `F(x)` as `x -> a`, `x ≠ a`.
///
/// The annuli `(radii[k+1], radii[k]]` around `a` are scanned; outputs over
/// the innermost nonempty annuli are clustered at tolerance
/// `2 * resolution` and the cluster means are returned.
pub fn kuratowski_limsup(
    f: &MultifunctionGraph,
    a: &Point,
    radii: &[f64],
) -> Result<KuratowskiLimit> {
    let data = limit_data(f, a, radii)?;
    let tol = 2.0 * f.resolution();
    let pts = limsup_points(f, &data, tol);
    Ok(KuratowskiLimit {
        points: f.output_cloud(f.n, pts),
        truncated: data.truncated,
        nonempty_annuli: data.nonempty,
        tolerance: tol,
    })
}

/// Kuratowski lower limit: the points of the upper limit that stay within
/// tolerance of the (punctured) section at every sampled input of the
/// innermost annuli.
pub fn kuratowski_liminf(
    f: &MultifunctionGraph,
    a: &Point,
    radii: &[f64],
) -> Result<KuratowskiLimit> {
    let data = limit_data(f, a, radii)?;
    let tol = 2.0 * f.resolution();
    let candidates = limsup_points(f, &data, tol);
    let inputs = dedup_cells(data.inner_inputs.iter().cloned(), f.resolution() * 1e-6);
    let sections: Vec<Vec<Point>> = inputs
        .par_iter()
        .map(|x| {
            f.x_index
                .within(&x.0, f.slab)
                .into_iter()
                .map(|i| &f.graph.points()[i])
                .filter(|p| dist(f.x_of(p), &a.0) > data.inner_radius)
                .map(|p| f.y_of(p))
                .collect()
        })
        .collect();
    let pts = candidates
        .into_iter()
        .filter(|y| {
            sections
                .iter()
                .all(|s| s.iter().map(|v| v.dist(y)).fold(f64::INFINITY, f64::min) <= tol)
        })
        .collect();
    Ok(KuratowskiLimit {
        points: f.output_cloud(f.n, pts),
        truncated: data.truncated,
        nonempty_annuli: data.nonempty,
        tolerance: tol,
    })
}

/// General set of zeroes `{x : (x, 0) ∈ closure(Γ_f)}`, at sampling
/// accuracy: inputs of graph samples with `|y| <= slab`.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralZeroSet {
    pub points: PointCloud,
}

pub fn general_zero_set(f: &MultifunctionGraph) -> GeneralZeroSet {
    let xs = f
        .graph
        .iter()
        .filter(|p| norm(&p.0[f.m..]) <= f.slab)
        .map(|p| Point(f.x_of(p).to_vec()));
    GeneralZeroSet {
        points: f.output_cloud(f.m, dedup_cells(xs, f.graph.resolution())),
    }
}
