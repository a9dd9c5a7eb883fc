//! Clarke subgradients of piecewise-smooth Lipschitz functions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::expr::{Expr, ExprFn};
use crate::linalg::{dot, solve};
use crate::sets::{norm, BoxDomain, Point, PointCloud};

/// A real function of `arity` variables that can be evaluated pointwise.
pub trait ScalarField: Sync {
    fn arity(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
}

impl ScalarField for ExprFn {
    fn arity(&self) -> usize {
        ExprFn::arity(self)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
}

/// One smooth piece: `value` on `{x : g(x) >= 0 for every g in region}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub region: Vec<ExprFn>,
    pub value: ExprFn,
    pub gradient: Option<Vec<ExprFn>>,
}

impl Piece {
    fn contains(&self, x: &[f64]) -> bool {
        self.region
            .iter()
            .all(|g| matches!(g.eval(x), Ok(v) if v >= 0.0))
    }

    fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.gradient {
            Some(gs) => gs.iter().map(|g| g.eval(x)).collect(),
            None => central_difference(&self.value, x),
        }
    }
}

fn central_difference(f: &ExprFn, x: &[f64]) -> Result<Vec<f64>> {
    let h = 1e-6 * norm(x).max(1.0);
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = f.eval(&xp)?;
            xp[i] = x[i] - h;
            let fm = f.eval(&xp)?;
            xp[i] = x[i];
            Ok((fp - fm) / (2.0 * h))
        })
        .collect()
}

#[derive(Deserialize, Serialize)]
struct RawPiece {
    #[serde(default)]
    region: Vec<Expr>,
    value: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gradient: Option<Vec<Expr>>,
}

#[derive(Deserialize, Serialize)]
struct RawPiecewise {
    arity: usize,
    lipschitz_bound: f64,
    pieces: Vec<RawPiece>,
}

/// A piecewise-smooth function with a declared Lipschitz bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise", into = "RawPiecewise")]
pub struct PiecewiseFn {
    arity: usize,
    pieces: Vec<Piece>,
    lipschitz_bound: f64,
}

impl TryFrom<RawPiecewise> for PiecewiseFn {
    type Error = Error;

    fn try_from(raw: RawPiecewise) -> Result<Self> {
        let m = raw.arity;
        let pieces = raw
            .pieces
            .into_iter()
            .map(|p| {
                Ok(Piece {
                    region: p
                        .region
                        .into_iter()
                        .map(|g| ExprFn::new(m, g))
                        .collect::<Result<_>>()?,
                    value: ExprFn::new(m, p.value)?,
                    gradient: p
                        .gradient
                        .map(|gs| {
                            gs.into_iter()
                                .map(|g| ExprFn::new(m, g))
                                .collect::<Result<_>>()
                        })
                        .transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseFn::new(m, pieces, raw.lipschitz_bound)
    }
}

impl From<PiecewiseFn> for RawPiecewise {
    fn from(f: PiecewiseFn) -> Self {
        RawPiecewise {
            arity: f.arity,
            lipschitz_bound: f.lipschitz_bound,
            pieces: f
                .pieces
                .into_iter()
                .map(|p| RawPiece {
                    region: p.region.into_iter().map(|g| g.expr().clone()).collect(),
                    value: p.value.expr().clone(),
                    gradient: p
                        .gradient
                        .map(|gs| gs.into_iter().map(|g| g.expr().clone()).collect()),
                })
                .collect(),
        }
    }
}

impl PiecewiseFn {
    pub fn new(arity: usize, pieces: Vec<Piece>, lipschitz_bound: f64) -> Result<PiecewiseFn> {
        if arity == 0 {
            return Err(invalid("arity must be positive"));
        }
        if pieces.is_empty() {
            return Err(invalid("a piecewise function needs at least one piece"));
        }
        if !(lipschitz_bound > 0.0 && lipschitz_bound.is_finite()) {
            return Err(invalid(format!(
                "lipschitz bound must be positive, got {lipschitz_bound}"
            )));
        }
        for (i, p) in pieces.iter().enumerate() {
            for e in p.region.iter().chain(std::iter::once(&p.value)) {
                check_dim(arity, e.arity())?;
            }
            if let Some(gs) = &p.gradient {
                if gs.len() != arity {
                    return Err(invalid(format!(
                        "piece {i} declares {} gradient components for arity {arity}",
                        gs.len()
                    )));
                }
                for g in gs {
                    check_dim(arity, g.arity())?;
                }
            }
        }
        Ok(PiecewiseFn {
            arity,
            pieces,
            lipschitz_bound,
        })
    }

    /// A single smooth piece defined everywhere.
    pub fn smooth(
        value: ExprFn,
        gradient: Option<Vec<ExprFn>>,
        lipschitz_bound: f64,
    ) -> Result<PiecewiseFn> {
        let arity = value.arity();
        PiecewiseFn::new(
            arity,
            vec![Piece {
                region: Vec::new(),
                value,
                gradient,
            }],
            lipschitz_bound,
        )
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    /// Index of the first piece whose region contains `x`.
    pub fn piece_at(&self, x: &[f64]) -> Option<usize> {
        self.pieces.iter().position(|p| p.contains(x))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.arity, x.len())?;
        match self.piece_at(x) {
            Some(i) => self.pieces[i].value.eval(x),
            None => Err(Error::OutsideDomain { point: x.to_vec() }),
        }
    }

    /// Scaled copy `c f`.
    pub fn scaled(&self, c: f64) -> Result<PiecewiseFn> {
        let k = Expr::constant(c);
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                Ok(Piece {
                    region: p.region.clone(),
                    value: ExprFn::new(self.arity, k.clone() * p.value.expr().clone())?,
                    gradient: p
                        .gradient
                        .as_ref()
                        .map(|gs| {
                            gs.iter()
                                .map(|g| ExprFn::new(self.arity, k.clone() * g.expr().clone()))
                                .collect::<Result<Vec<_>>>()
                        })
                        .transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseFn::new(
            self.arity,
            pieces,
            self.lipschitz_bound * c.abs().max(f64::MIN_POSITIVE),
        )
    }

    /// First-order distance from `x` to the nearest region seam:
    /// `min |g(x)| / |grad g(x)|` over every region predicate.
    pub fn seam_distance(&self, x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for g in self.pieces.iter().flat_map(|p| &p.region) {
            let d = match g.eval_grad(x) {
                Ok((v, grad)) => {
                    let n = norm(&grad);
                    if v == 0.0 {
                        0.0
                    } else if n > 0.0 && n.is_finite() {
                        v.abs() / n
                    } else if n == 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                }
                Err(_) => 0.0,
            };
            best = best.min(d);
        }
        best
    }

    /// Checks the declared structure on a grid over `window`: coverage by
    /// the regions, agreement of values on overlaps (1e-9), declared
    /// gradients against central differences (1e-6) away from seams, and
    /// gradient norms against the Lipschitz bound.
    pub fn validate(&self, window: &BoxDomain, grid_step: f64) -> Result<()> {
        check_dim(self.arity, window.dim())?;
        let grid = window.grid(grid_step, &[])?;
        let margin = 10.0 * grid_step.min(1e-3);
        (0..grid.len()).into_par_iter().try_for_each(|idx| {
            let x = grid.point(idx);
            let active: Vec<&Piece> = self.pieces.iter().filter(|p| p.contains(&x)).collect();
            let Some(first) = active.first() else {
                return Err(invalid(format!("grid point {x:?} lies in no region")));
            };
            let v0 = first.value.eval(&x)?;
            for p in &active[1..] {
                let v = p.value.eval(&x)?;
                if (v - v0).abs() > 1e-9 * v0.abs().max(1.0) {
                    return Err(invalid(format!("pieces disagree at {x:?}: {v0} vs {v}")));
                }
            }
            if self.seam_distance(&x) >= margin {
                for p in &active {
                    let fd = central_difference(&p.value, &x)?;
                    let g = p.gradient_at(&x)?;
                    let n = norm(&g);
                    if p.gradient.is_some() {
                        let err = crate::sets::dist(&fd, &g);
                        if err > 1e-6 * n.max(1.0) {
                            return Err(invalid(format!(
                                "declared gradient {g:?} differs from finite differences {fd:?} at {x:?}"
                            )));
                        }
                    }
                    if n > self.lipschitz_bound * (1.0 + 1e-9) {
                        return Err(invalid(format!(
                            "gradient norm {n} at {x:?} exceeds the lipschitz bound {}",
                            self.lipschitz_bound
                        )));
                    }
                }
            }
            Ok(())
        })
    }
}

impl ScalarField for PiecewiseFn {
    fn arity(&self) -> usize {
        self.arity
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
}

/// Sampling parameters for gradient limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgradientConfig {
    pub radius_schedule: Vec<f64>,
    pub samples_per_radius: usize,
    pub seam_margin: f64,
    pub hull_tol: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SubgradientConfig {
    pub fn for_arity(m: usize) -> SubgradientConfig {
        SubgradientConfig {
            radius_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4],
            samples_per_radius: (2 * m + 2).max(32),
            seam_margin: 0.1,
            hull_tol: 1e-9,
            seed: 0,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let r = &self.radius_schedule;
        if r.is_empty()
            || r.iter().any(|v| !(*v > 0.0 && v.is_finite()))
            || r.windows(2).any(|w| !(w[1] < w[0]))
        {
            return Err(invalid(
                "radius schedule must be positive and strictly decreasing",
            ));
        }
        if self.samples_per_radius < 2 * m + 2 {
            return Err(invalid(format!(
                "samples_per_radius must be at least {}, got {}",
                2 * m + 2,
                self.samples_per_radius
            )));
        }
        if !(self.seam_margin > 0.0 && self.seam_margin < 1.0) {
            return Err(invalid("seam margin must lie in (0, 1)"));
        }
        if !(self.hull_tol > 0.0) {
            return Err(invalid("hull tolerance must be positive"));
        }
        Ok(())
    }
}

fn ball_samples(x: &[f64], r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
    (0..count)
        .map(|_| {
            let g: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = norm(&g).max(f64::MIN_POSITIVE);
            let s = r * unit.sample(&mut rng).powf(1.0 / m as f64) / n;
            x.iter().zip(&g).map(|(xi, gi)| xi + s * gi).collect()
        })
        .collect()
}

/// Candidate limits of gradients `∇f(x_ν)` along differentiability points
/// `x_ν -> x`.
///
/// The ball of the smallest scheduled radius `r` is sampled and samples
/// within `seam_margin * r` of a seam are discarded. Every piece hit by the
/// remaining samples contributes its gradient at `x` (continuity of the
/// piece gradient makes this the limit along that piece). Candidates closer
/// than the observed gradient spread are merged.
pub fn gradient_limits(f: &PiecewiseFn, x: &Point, cfg: &SubgradientConfig) -> Result<Vec<Point>> {
    check_dim(f.arity, x.dim())?;
    cfg.validate(f.arity)?;
    let r = *cfg.radius_schedule.last().unwrap();
    let samples = ball_samples(&x.0, r, cfg.samples_per_radius, cfg.seed);

    let mut hits: Vec<Vec<Vec<f64>>> = vec![Vec::new(); f.pieces.len()];
    for s in samples {
        if f.seam_distance(&s) < cfg.seam_margin * r {
            continue;
        }
        if let Some(i) = f.piece_at(&s) {
            hits[i].push(s);
        }
    }
    if hits.iter().all(|h| h.is_empty()) {
        return Err(Error::DegenerateSeams { radius: r });
    }

    let mut limits = Vec::new();
    let mut spread = 0.0f64;
    for (piece, pts) in f.pieces.iter().zip(&hits) {
        if pts.is_empty() {
            continue;
        }
        let grads: Vec<Vec<f64>> = pts
            .iter()
            .filter_map(|s| piece.gradient_at(s).ok())
            .collect();
        for a in &grads {
            for b in &grads {
                spread = spread.max(crate::sets::dist(a, b));
            }
        }
        let limit = match piece.gradient_at(&x.0) {
            Ok(g) if g.iter().all(|v| v.is_finite()) => g,
            _ => {
                // gradient undefined at x itself: take the closest sample
                let nearest = pts
                    .iter()
                    .min_by(|a, b| {
                        crate::sets::dist(a, &x.0).total_cmp(&crate::sets::dist(b, &x.0))
                    })
                    .unwrap();
                piece.gradient_at(nearest)?
            }
        };
        limits.push(Point(limit));
    }
    let tol = spread.max(cfg.hull_tol);
    let mut merged: Vec<Point> = Vec::new();
    for l in limits {
        if merged.iter().all(|m| m.dist(&l) > tol) {
            merged.push(l);
        }
    }
    Ok(merged)
}

/// Convex hull given by a minimal vertex list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
}

impl Polytope {
    /// Builds the hull of `points`, dropping duplicates and points within
    /// `hull_tol` of the hull of the remaining ones.
    pub fn new(dim: usize, points: Vec<Point>, hull_tol: f64) -> Result<Polytope> {
        if points.is_empty() {
            return Err(Error::EmptySet("polytope needs at least one point".into()));
        }
        for p in &points {
            check_dim(dim, p.dim())?;
        }
        let mut verts: Vec<Point> = Vec::new();
        for p in points {
            if verts.iter().all(|v| v.dist(&p) > hull_tol) {
                verts.push(p);
            }
        }
        let mut i = 0;
        while i < verts.len() && verts.len() > 1 {
            let p = &verts[i];
            let shifted: Vec<Point> = verts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| Point(v.0.iter().zip(&p.0).map(|(a, b)| a - b).collect()))
                .collect();
            let (_, d) = wolfe(dim, &shifted, hull_tol * hull_tol * 1e-2, 10_000)?;
            if d <= hull_tol {
                verts.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(Polytope {
            dim,
            vertices: verts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }
}

const MAX_WOLFE_ITERATIONS: usize = 1000;

/// Wolfe's minimum-norm-point algorithm. `tol` bounds the duality gap
/// `|x|^2 - min_p <x, p>`.
fn wolfe(dim: usize, pts: &[Point], tol: f64, cap: usize) -> Result<(Point, f64)> {
    let scale = pts
        .iter()
        .map(|p| dot(&p.0, &p.0))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let eps = 1e-12;
    let start = (0..pts.len())
        .min_by(|&a, &b| dot(&pts[a].0, &pts[a].0).total_cmp(&dot(&pts[b].0, &pts[b].0)))
        .unwrap();
    let mut set = vec![start];
    let mut lambda = vec![1.0];
    let mut x = pts[start].0.clone();
    let combine = |set: &[usize], lambda: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for (&i, &l) in set.iter().zip(lambda) {
            for (acc, c) in v.iter_mut().zip(&pts[i].0) {
                *acc += l * c;
            }
        }
        v
    };
    let mut gap = f64::INFINITY;
    for _ in 0..cap {
        let xx = dot(&x, &x);
        let (j, best) = (0..pts.len())
            .map(|j| (j, dot(&x, &pts[j].0)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        gap = xx - best;
        if gap <= tol || set.contains(&j) || set.len() > dim {
            let n = norm(&x);
            return Ok((Point(x), n));
        }
        set.push(j);
        lambda.push(0.0);
        loop {
            let k = set.len();
            // affine minimizer: [G 1; 1^T 0] [mu; nu] = [0; 1]
            let mut a = vec![0.0; (k + 1) * (k + 1)];
            for r in 0..k {
                for c in 0..k {
                    a[r * (k + 1) + c] = dot(&pts[set[r]].0, &pts[set[c]].0) / scale;
                }
                a[r * (k + 1) + k] = 1.0;
                a[k * (k + 1) + r] = 1.0;
            }
            let mut b = vec![0.0; k + 1];
            b[k] = 1.0;
            let Some(sol) = solve(a, b) else {
                // affinely dependent set; drop the newest point
                set.pop();
                lambda.pop();
                let n = norm(&x);
                return Ok((Point(x), n));
            };
            let mu = &sol[..k];
            if mu.iter().all(|&v| v > eps) {
                lambda = mu.to_vec();
                break;
            }
            let theta = (0..k)
                .filter(|&i| mu[i] <= eps)
                .map(|i| lambda[i] / (lambda[i] - mu[i]))
                .fold(1.0f64, f64::min);
            for i in 0..k {
                lambda[i] = (1.0 - theta) * lambda[i] + theta * mu[i];
            }
            let mut i = 0;
            while i < set.len() {
                if lambda[i] <= eps {
                    set.remove(i);
                    lambda.remove(i);
                } else {
                    i += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            for l in &mut lambda {
                *l /= total;
            }
        }
        x = combine(&set, &lambda);
    }
    Err(Error::NotConverged {
        iterations: cap,
        gap,
    })
}

/// Point of the polytope closest to the origin and its norm.
pub fn min_norm_point(p: &Polytope, tol: f64) -> Result<(Point, f64)> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    wolfe(p.dim, &p.vertices, tol, MAX_WOLFE_ITERATIONS)
}

/// `∂f(x)` as the hull of the gradient limits.
pub fn clarke_subgradient(f: &PiecewiseFn, x: &Point, cfg: &SubgradientConfig) -> Result<Polytope> {
    let limits = gradient_limits(f, x, cfg)?;
    Polytope::new(f.arity, limits, cfg.hull_tol)
}

/// `h(x) = min{|l| : l ∈ ∂f(x)}`.
pub fn min_norm_subgradient(f: &PiecewiseFn, x: &Point, cfg: &SubgradientConfig) -> Result<f64> {
    let p = clarke_subgradient(f, x, cfg)?;
    Ok(min_norm_point(&p, cfg.hull_tol * cfg.hull_tol)?.1)
}

/// Grid points of `window` where `0` lies (up to `3 hull_tol`) in `∂f`.
pub fn critical_set_sample(
    f: &PiecewiseFn,
    window: &BoxDomain,
    grid_step: f64,
    cfg: &SubgradientConfig,
) -> Result<PointCloud> {
    check_dim(f.arity, window.dim())?;
    cfg.validate(f.arity)?;
    let grid = window.grid(grid_step, &[])?;
    let keep: Vec<Option<Point>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = Point(grid.point(i));
            let h = min_norm_subgradient(f, &x, cfg)?;
            Ok((h <= 3.0 * cfg.hull_tol).then_some(x))
        })
        .collect::<Result<_>>()?;
    PointCloud::new(
        f.arity,
        keep.into_iter().flatten().collect(),
        grid_step * (f.arity as f64).sqrt(),
        window.circumradius(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x() -> Expr {
        Expr::var(0)
    }
    fn y() -> Expr {
        Expr::var(1)
    }

    fn f2(e: Expr) -> ExprFn {
        ExprFn::new(2, e).unwrap()
    }

    /// `|x| y` as two pieces split along the y-axis.
    fn abs_x_y() -> PiecewiseFn {
        PiecewiseFn::new(
            2,
            vec![
                Piece {
                    region: vec![f2(x())],
                    value: f2(x() * y()),
                    gradient: Some(vec![f2(y()), f2(x())]),
                },
                Piece {
                    region: vec![f2(-x())],
                    value: f2(-(x() * y())),
                    gradient: Some(vec![f2(-y()), f2(-x())]),
                },
            ],
            2f64.sqrt(),
        )
        .unwrap()
    }

    fn cfg() -> SubgradientConfig {
        SubgradientConfig::for_arity(2)
    }

    fn sorted(ps: &[Point]) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = ps.iter().map(|p| p.0.clone()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn smooth_gradient_limit() {
        let f = PiecewiseFn::smooth(f2(x().powi(2) + y().powi(2)), None, 10.0).unwrap();
        let l = gradient_limits(&f, &Point::from([1.0, 2.0]), &cfg()).unwrap();
        assert_eq!(l.len(), 1);
        assert!(l[0].dist(&Point::from([2.0, 4.0])) < 1e-6);
    }

    #[test]
    fn abs_x_y_subgradients() {
        let f = abs_x_y();
        let p = clarke_subgradient(&f, &Point::from([2.0, 3.0]), &cfg()).unwrap();
        assert_eq!(sorted(p.vertices()), vec![vec![3.0, 2.0]]);
        let p = clarke_subgradient(&f, &Point::from([0.0, 3.0]), &cfg()).unwrap();
        assert_eq!(sorted(p.vertices()), vec![vec![-3.0, 0.0], vec![3.0, 0.0]]);
        let p = clarke_subgradient(&f, &Point::from([0.0, 0.0]), &cfg()).unwrap();
        assert_eq!(p.vertices().len(), 1);
        assert!(p.vertices()[0].norm() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let f = abs_x_y();
        let s = serde_json::to_string(&f).unwrap();
        let g: PiecewiseFn = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        let bad =
            r#"{"arity":2,"lipschitz_bound":1,"pieces":[{"value":["var",0],"gradient":[1]}]}"#;
        assert!(serde_json::from_str::<PiecewiseFn>(bad).is_err());
    }

    #[test]
    fn validation() {
        let w = BoxDomain::cube(&[0.0, 0.0], 1.0);
        abs_x_y().validate(&w, 0.05).unwrap();
        let wrong = PiecewiseFn::smooth(f2(x() * y()), Some(vec![f2(y()), f2(y())]), 10.0).unwrap();
        assert!(wrong.validate(&w, 0.05).is_err());
        let gap = PiecewiseFn::new(
            2,
            vec![Piece {
                region: vec![f2(x() - Expr::constant(0.5))],
                value: f2(x()),
                gradient: None,
            }],
            1.0,
        )
        .unwrap();
        assert!(gap.validate(&w, 0.05).is_err());
        let steep = PiecewiseFn::smooth(f2(x() * Expr::constant(5.0)), None, 1.0).unwrap();
        assert!(steep.validate(&w, 0.05).is_err());
    }

    #[test]
    fn min_norm_examples() {
        let p = Polytope::new(
            2,
            vec![Point::from([1.0, 0.0]), Point::from([0.0, 1.0])],
            1e-9,
        )
        .unwrap();
        let (q, n) = min_norm_point(&p, 1e-15).unwrap();
        assert!(q.dist(&Point::from([0.5, 0.5])) < 1e-12);
        assert!((n - 0.5f64.sqrt()).abs() < 1e-12);
        let p = Polytope::new(
            2,
            vec![Point::from([-3.0, 0.0]), Point::from([3.0, 0.0])],
            1e-9,
        )
        .unwrap();
        assert!(min_norm_point(&p, 1e-15).unwrap().1 < 1e-12);
        let p = Polytope::new(2, vec![Point::from([3.0, 2.0])], 1e-9).unwrap();
        assert!((min_norm_point(&p, 1e-15).unwrap().1 - 13f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hull_reduction_drops_interior_points() {
        let pts = vec![
            Point::from([0.0, 0.0]),
            Point::from([1.0, 0.0]),
            Point::from([0.0, 1.0]),
            Point::from([0.2, 0.2]),
            Point::from([0.5, 0.5]),
            Point::from([1.0, 0.0]),
        ];
        let p = Polytope::new(2, pts, 1e-9).unwrap();
        assert_eq!(
            sorted(p.vertices()),
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        assert!(Polytope::new(2, vec![], 1e-9).is_err());
    }

    #[test]
    fn critical_sets() {
        let w = BoxDomain::cube(&[0.0, 0.0], 1.0);
        let c = critical_set_sample(&abs_x_y(), &w, 0.1, &cfg()).unwrap();
        assert_eq!(c.len(), 21);
        assert!(c.iter().all(|p| p.0[0].abs() < 1e-12));
        let sq = PiecewiseFn::smooth(f2(x().powi(2) + y().powi(2)), None, 10.0).unwrap();
        let c = critical_set_sample(&sq, &w, 0.1, &cfg()).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.points()[0].norm() < 1e-9);
        let k = PiecewiseFn::smooth(f2(Expr::constant(2.0)), None, 1.0).unwrap();
        assert_eq!(critical_set_sample(&k, &w, 0.1, &cfg()).unwrap().len(), 441);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        c.samples_per_radius = 5;
        assert!(c.validate(2).is_err());
        let mut c = cfg();
        c.radius_schedule = vec![0.1, 0.2];
        assert!(c.validate(2).is_err());
    }

    #[test]
    fn degenerate_seams_are_reported() {
        // every sample is within the margin of the seam family at radius 1e-4
        let f = PiecewiseFn::new(
            1,
            vec![Piece {
                region: vec![ExprFn::new(1, Expr::constant(0.0) * Expr::var(0)).unwrap()],
                value: ExprFn::new(1, Expr::var(0)).unwrap(),
                gradient: None,
            }],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            gradient_limits(&f, &Point::from([0.0]), &SubgradientConfig::for_arity(1)),
            Err(Error::DegenerateSeams { .. })
        ));
    }

    fn dense_oracle(verts: &[Point]) -> f64 {
        // convex combinations on a zooming grid of barycentric weights
        let k = verts.len();
        let dim = verts[0].dim();
        let eval = |w: &[f64]| {
            let mut v = vec![0.0; dim];
            for (p, wi) in verts.iter().zip(w) {
                for (a, c) in v.iter_mut().zip(&p.0) {
                    *a += wi * c;
                }
            }
            norm(&v)
        };
        let mut center = vec![1.0 / k as f64; k];
        let mut step = 0.05;
        let mut best = eval(&center);
        while step > 1e-7 {
            let mut improved = true;
            while improved {
                improved = false;
                for i in 0..k {
                    for j in 0..k {
                        if i == j || center[j] < step {
                            continue;
                        }
                        let mut w = center.clone();
                        w[i] += step;
                        w[j] -= step;
                        let v = eval(&w);
                        if v < best - 1e-15 {
                            best = v;
                            center = w;
                            improved = true;
                        }
                    }
                }
            }
            step *= 0.5;
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn wolfe_matches_dense_oracle(
            dim in 2usize..4,
            raw in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 2..6),
        ) {
            let verts: Vec<Point> = raw.iter().map(|v| Point(v[..dim].to_vec())).collect();
            let p = Polytope::new(dim, verts.clone(), 1e-9).unwrap();
            let (q, n) = min_norm_point(&p, 1e-14).unwrap();
            prop_assert!((q.norm() - n).abs() < 1e-12);
            prop_assert!((n - dense_oracle(&verts)).abs() <= 1e-5);
        }
    }
}
