//! Point clouds as the working representation of closed sets.
//!
//! A [`PointCloud`] is a finite sample of a closed set together with a
//! resolution (an upper bound on the Hausdorff gap between the set, restricted
//! to the sampling window, and the sample) and the radius of that window.
//! The empty cloud is a legal value and stands for the empty set.

mod nearest;
mod sample;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::expr::ExprFn;

pub use nearest::NearestIndex;
pub use sample::{sample, REFINE_STEPS};

/// A point of some `R^n`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Point {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Point {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Point {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Point {
        Point(v.to_vec())
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// Points may sit a hair outside the window after arithmetic on the radius.
const WINDOW_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCloud")]
pub struct PointCloud {
    dim: usize,
    resolution: f64,
    window_radius: f64,
    points: Vec<Point>,
}

#[derive(Deserialize)]
struct RawCloud {
    dim: usize,
    resolution: f64,
    window_radius: f64,
    points: Vec<Point>,
}

impl TryFrom<RawCloud> for PointCloud {
    type Error = Error;
    fn try_from(r: RawCloud) -> Result<PointCloud> {
        PointCloud::new(r.dim, r.points, r.resolution, r.window_radius)
    }
}

impl PointCloud {
    pub fn new(
        dim: usize,
        points: Vec<Point>,
        resolution: f64,
        window_radius: f64,
    ) -> Result<PointCloud> {
        if dim == 0 {
            return Err(invalid("point cloud dimension must be positive"));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(invalid(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if !(window_radius > 0.0 && window_radius.is_finite()) {
            return Err(invalid(format!(
                "window radius must be positive, got {window_radius}"
            )));
        }
        for p in &points {
            check_dim(dim, p.dim())?;
            if !p.is_finite() {
                return Err(invalid(format!("non-finite point {p:?}")));
            }
            if p.norm() > window_radius * (1.0 + WINDOW_SLACK) {
                return Err(invalid(format!(
                    "point {p:?} lies outside the window of radius {window_radius}"
                )));
            }
        }
        Ok(PointCloud {
            dim,
            resolution,
            window_radius,
            points,
        })
    }

    /// Builds a cloud whose window is the smallest ball about the origin
    /// containing the points (never smaller than `resolution`).
    pub fn from_points(dim: usize, points: Vec<Point>, resolution: f64) -> Result<PointCloud> {
        let r = points.iter().map(Point::norm).fold(resolution, f64::max);
        PointCloud::new(dim, points, resolution, r)
    }

    pub fn empty(dim: usize, resolution: f64, window_radius: f64) -> Result<PointCloud> {
        PointCloud::new(dim, Vec::new(), resolution, window_radius)
    }

    /// Same metadata, different points. Points are not re-validated against
    /// the window beyond a debug assertion; callers only pass subsets or
    /// points already known to be inside.
    pub(crate) fn with_points(&self, points: Vec<Point>) -> PointCloud {
        debug_assert!(points.iter().all(|p| p.dim() == self.dim));
        PointCloud {
            points,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }
}

/// Euclidean distance from `x` to the sample `a`; `+inf` when `a` is empty.
pub fn dist_point_set(x: &Point, a: &PointCloud) -> Result<f64> {
    check_dim(a.dim(), x.dim())?;
    Ok(a.iter().map(|p| x.dist(p)).fold(f64::INFINITY, f64::min))
}

/// `E ∩ B̄(0, r)`.
pub fn restrict_ball(e: &PointCloud, r: f64) -> Result<PointCloud> {
    if !(r > 0.0) {
        return Err(invalid(format!("ball radius must be positive, got {r}")));
    }
    let pts = e.iter().filter(|p| p.norm() <= r).cloned().collect();
    Ok(e.with_points(pts))
}

/// Points of `E` in the spherical shell `| |p| - r | <= shell`.
pub fn intersect_sphere(e: &PointCloud, r: f64, shell: f64) -> Result<PointCloud> {
    if !(r > 0.0) {
        return Err(invalid(format!("sphere radius must be positive, got {r}")));
    }
    if !(shell >= e.resolution()) {
        return Err(invalid(format!(
            "shell {shell} is thinner than the cloud resolution {}",
            e.resolution()
        )));
    }
    let pts = e
        .iter()
        .filter(|p| (p.norm() - r).abs() <= shell)
        .cloned()
        .collect();
    Ok(e.with_points(pts))
}

/// An axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxDomain(pub Vec<(f64, f64)>);

impl BoxDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> BoxDomain {
        BoxDomain(bounds)
    }

    /// The cube `center + [-half_width, half_width]^n`.
    pub fn cube(center: &[f64], half_width: f64) -> BoxDomain {
        BoxDomain(
            center
                .iter()
                .map(|c| (c - half_width, c + half_width))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::EmptyBox("box has no axes".into()));
        }
        for (i, (lo, hi)) in self.0.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || !(lo < hi) {
                return Err(Error::EmptyBox(format!("axis {i} has bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn shortest_edge(&self) -> f64 {
        self.0
            .iter()
            .map(|(lo, hi)| hi - lo)
            .fold(f64::INFINITY, f64::min)
    }

    /// Radius of the smallest origin-centred ball containing the box.
    pub fn circumradius(&self) -> f64 {
        self.0
            .iter()
            .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        self.0
            .iter()
            .zip(x)
            .all(|((lo, hi), v)| *v >= lo - slack && *v <= hi + slack)
    }

    /// Regular grid with spacing `step`, starting at `lo + offset`.
    pub fn grid(&self, step: f64, offset: &[f64]) -> Result<Grid> {
        self.validate()?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("grid step must be positive, got {step}")));
        }
        let mut lo = Vec::with_capacity(self.dim());
        let mut counts = Vec::with_capacity(self.dim());
        for (i, (a, b)) in self.0.iter().enumerate() {
            let start = a + offset.get(i).copied().unwrap_or(0.0);
            let n = ((b - start) / step + 1e-9).floor();
            if n < 0.0 {
                return Err(invalid("grid offset leaves no points in the box"));
            }
            lo.push(start);
            counts.push(n as usize + 1);
        }
        let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
        match total {
            Some(t) if t <= MAX_GRID_POINTS => Ok(Grid { lo, step, counts }),
            _ => Err(invalid(format!(
                "grid with step {step} has more than {MAX_GRID_POINTS} points"
            ))),
        }
    }
}

pub const MAX_GRID_POINTS: usize = 400_000_000;

/// A regular grid over a box; points are enumerated with the last axis
/// varying fastest.
#[derive(Clone, Debug)]
pub struct Grid {
    lo: Vec<f64>,
    step: f64,
    counts: Vec<usize>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of grid points along each axis.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn point_into(&self, mut idx: usize, out: &mut [f64]) {
        for axis in (0..self.counts.len()).rev() {
            let c = self.counts[axis];
            let k = idx % c;
            idx /= c;
            out[axis] = self.lo[axis] + k as f64 * self.step;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(idx, &mut out);
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// A set given by equalities `g_i(x) = 0` (up to `equality_tolerance`),
/// inequalities `h_j(x) >= 0`, and a bounding box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawImplicitSet", into = "RawImplicitSet")]
pub struct ImplicitSetSpec {
    dim: usize,
    equalities: Vec<ExprFn>,
    inequalities: Vec<ExprFn>,
    bounds: BoxDomain,
    equality_tolerance: f64,
}

#[derive(Serialize, Deserialize)]
struct RawImplicitSet {
    dim: usize,
    #[serde(default)]
    equalities: Vec<crate::expr::Expr>,
    #[serde(default)]
    inequalities: Vec<crate::expr::Expr>,
    #[serde(rename = "box")]
    bounds: BoxDomain,
    #[serde(default = "default_equality_tolerance")]
    equality_tolerance: f64,
}

fn default_equality_tolerance() -> f64 {
    1e-3
}

impl TryFrom<RawImplicitSet> for ImplicitSetSpec {
    type Error = Error;
    fn try_from(r: RawImplicitSet) -> Result<ImplicitSetSpec> {
        let lift = |es: Vec<crate::expr::Expr>| -> Result<Vec<ExprFn>> {
            es.into_iter().map(|e| ExprFn::new(r.dim, e)).collect()
        };
        ImplicitSetSpec::new(
            r.dim,
            lift(r.equalities)?,
            lift(r.inequalities)?,
            r.bounds,
            r.equality_tolerance,
        )
    }
}

impl From<ImplicitSetSpec> for RawImplicitSet {
    fn from(s: ImplicitSetSpec) -> RawImplicitSet {
        RawImplicitSet {
            dim: s.dim,
            equalities: s.equalities.iter().map(|f| f.expr().clone()).collect(),
            inequalities: s.inequalities.iter().map(|f| f.expr().clone()).collect(),
            bounds: s.bounds,
            equality_tolerance: s.equality_tolerance,
        }
    }
}

impl ImplicitSetSpec {
    pub fn new(
        dim: usize,
        equalities: Vec<ExprFn>,
        inequalities: Vec<ExprFn>,
        bounds: BoxDomain,
        equality_tolerance: f64,
    ) -> Result<ImplicitSetSpec> {
        if dim == 0 {
            return Err(invalid("set dimension must be positive"));
        }
        check_dim(dim, bounds.dim())?;
        bounds.validate()?;
        for f in equalities.iter().chain(&inequalities) {
            check_dim(dim, f.arity())?;
        }
        if !(equality_tolerance > 0.0) {
            return Err(invalid(format!(
                "equality tolerance must be positive, got {equality_tolerance}"
            )));
        }
        Ok(ImplicitSetSpec {
            dim,
            equalities,
            inequalities,
            bounds,
            equality_tolerance,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn equalities(&self) -> &[ExprFn] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[ExprFn] {
        &self.inequalities
    }

    pub fn bounds(&self) -> &BoxDomain {
        &self.bounds
    }

    pub fn equality_tolerance(&self) -> f64 {
        self.equality_tolerance
    }
}
