//! Empirical power-law exponents of local inequalities.
//!
//! Every estimator reduces to pairs `(u, v)` for which an inequality
//! `v >= C u^l` is expected near the base point and fits the lower envelope
//! of the pairs on a log-log scale.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::expr::ExprFn;
use crate::sets::{BoxDomain, NearestIndex, Point, PointCloud};
use crate::subgradients::{min_norm_subgradient, PiecewiseFn, ScalarField, SubgradientConfig};

pub const DEFAULT_BINS: usize = 12;

/// Share of empty bins above which a fit is rejected.
const MAX_EMPTY_BIN_SHARE: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub constant: f64,
    /// Range `(min, max)` of the abscissae that entered the fit.
    pub window: (f64, f64),
    pub bins: usize,
    /// Largest absolute residual of the regression in log space.
    pub max_residual: f64,
    /// `(ln u, ln v)` pairs the line was fitted to.
    pub envelope: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Line {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub(crate) fn fit_line(pairs: &[(f64, f64)]) -> Line {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let max_residual = pairs
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Line {
        slope,
        intercept,
        max_residual,
    }
}

/// One input pair of an envelope fit, in log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub log_u: f64,
    pub log_v: f64,
    pub bin: usize,
    /// The pair is the minimum of its bin.
    pub is_min: bool,
}

fn check_samples(samples: &[(f64, f64)], bins: usize) -> Result<()> {
    if bins < 5 {
        return Err(invalid(format!("need at least 5 bins, got {bins}")));
    }
    if samples.len() < bins * 3 {
        return Err(Error::FitRejected(format!(
            "{} samples are too few for {bins} bins",
            samples.len()
        )));
    }
    if let Some(s) = samples
        .iter()
        .find(|(u, v)| !(*u > 0.0 && *v > 0.0 && u.is_finite() && v.is_finite()))
    {
        return Err(invalid(format!(
            "envelope samples must be positive and finite, got {s:?}"
        )));
    }
    Ok(())
}

/// Bins the pairs by `ln u` and marks the minimum of `ln v` in every bin.
pub fn envelope_table(samples: &[(f64, f64)], bins: usize) -> Result<Vec<EnvelopeRow>> {
    check_samples(samples, bins)?;
    let logs: Vec<(f64, f64)> = samples.iter().map(|(u, v)| (u.ln(), v.ln())).collect();
    let lo = logs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = logs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::FitRejected("all abscissae coincide".into()));
    }
    let width = (hi - lo) / bins as f64;
    let mut rows: Vec<EnvelopeRow> = logs
        .iter()
        .map(|&(lu, lv)| EnvelopeRow {
            log_u: lu,
            log_v: lv,
            bin: (((lu - lo) / width) as usize).min(bins - 1),
            is_min: false,
        })
        .collect();
    let mut best: Vec<Option<usize>> = vec![None; bins];
    for (i, r) in rows.iter().enumerate() {
        let b = &mut best[r.bin];
        if b.is_none_or(|j| r.log_v < rows[j].log_v) {
            *b = Some(i);
        }
    }
    for i in best.into_iter().flatten() {
        rows[i].is_min = true;
    }
    Ok(rows)
}

/// Least-squares line through the per-bin minima of `ln v` against `ln u`.
pub fn fit_envelope(samples: &[(f64, f64)], bins: usize) -> Result<ExponentFit> {
    let rows = envelope_table(samples, bins)?;
    let mut mins: Vec<&EnvelopeRow> = rows.iter().filter(|r| r.is_min).collect();
    let empty = bins - mins.len();
    if empty as f64 > MAX_EMPTY_BIN_SHARE * bins as f64 {
        return Err(Error::FitRejected(format!(
            "{empty} of {bins} bins are empty"
        )));
    }
    mins.sort_by_key(|r| r.bin);
    let envelope: Vec<(f64, f64)> = mins.iter().map(|r| (r.log_u, r.log_v)).collect();
    let line = fit_line(&envelope);
    let (umin, umax) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), (u, _)| {
            (a.min(*u), b.max(*u))
        });
    Ok(ExponentFit {
        exponent: line.slope,
        constant: line.intercept.exp(),
        window: (umin, umax),
        bins,
        max_residual: line.max_residual,
        envelope,
    })
}

fn max_dist_to_corner(window: &BoxDomain, a: &[f64]) -> f64 {
    window
        .0
        .iter()
        .zip(a)
        .map(|((lo, hi), c)| (c - lo).abs().max((hi - c).abs()).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Łojasiewicz exponent of `f` at `a`: fits
/// `|f(x) - f(a)| >= C d(x, f^{-1}(f(a)))^l` on a grid over `window`.
///
/// The level set is the union of `a`, grid points where `f = f(a)` and
/// linearly interpolated crossings between axis neighbours. Distances are
/// fitted on `10 grid_step <= u <= 0.3 R`, `R` the largest distance from `a`
/// to the window corners.
pub fn loj_function_exponent(
    f: &dyn ScalarField,
    a: &Point,
    window: &BoxDomain,
    grid_step: f64,
    bins: usize,
) -> Result<ExponentFit> {
    fit_envelope(&loj_function_samples(f, a, window, grid_step)?, bins)
}

/// The `(u, v)` pairs behind [`loj_function_exponent`].
pub fn loj_function_samples(
    f: &dyn ScalarField,
    a: &Point,
    window: &BoxDomain,
    grid_step: f64,
) -> Result<Vec<(f64, f64)>> {
    let m = f.arity();
    check_dim(m, a.dim())?;
    check_dim(m, window.dim())?;
    window.validate()?;
    if !window.contains(&a.0, 0.0) {
        return Err(invalid("base point lies outside the window"));
    }
    let fa = f.value(&a.0)?;
    let grid = window.grid(grid_step, &[])?;
    let diffs: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| Ok(f.value(&grid.point(i))? - fa))
        .collect::<Result<_>>()?;

    let counts = grid.counts();
    let mut strides = vec![1usize; m];
    for k in (0..m.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * counts[k + 1];
    }
    let level: Vec<Point> = (0..grid.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let di = diffs[i];
            let mut out = Vec::new();
            if di == 0.0 {
                out.push(Point(grid.point(i)));
                return out;
            }
            let x = grid.point(i);
            for k in 0..m {
                // forward neighbour along axis k, if any
                if (i / strides[k]) % counts[k] + 1 >= counts[k] {
                    continue;
                }
                let j = i + strides[k];
                let dj = diffs[j];
                if dj != 0.0 && (di < 0.0) != (dj < 0.0) {
                    let s = di / (di - dj);
                    let mut z = x.clone();
                    z[k] += s * grid_step;
                    out.push(Point(z));
                }
            }
            out
        })
        .chain(rayon::iter::once(a.clone()))
        .collect();
    let index = NearestIndex::new(m, &level);

    let r_min = 10.0 * grid_step;
    let r_max = 0.3 * max_dist_to_corner(window, &a.0);
    if !(r_max > r_min) {
        return Err(invalid("window is too small for the grid step"));
    }
    let samples: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .filter_map(|i| {
            let x = grid.point(i);
            let u = index.dist(&x);
            let v = diffs[i].abs();
            (u >= r_min && u <= r_max && v > 0.0).then_some((u, v))
        })
        .collect();
    if diffs.iter().all(|d| *d == 0.0) {
        return Err(Error::FitRejected("f is constant on the window".into()));
    }
    Ok(samples)
}

/// Points of `X` within `2 res` of `Y` that locally minimise `d(., Y)`
/// among points of `X` within `4 res`.
fn sampled_intersection(
    x: &PointCloud,
    y_index: &NearestIndex,
    res: f64,
) -> (Vec<Point>, Vec<f64>) {
    let dy: Vec<f64> = x.points().par_iter().map(|p| y_index.dist(&p.0)).collect();
    let x_index = NearestIndex::new(x.dim(), x.points());
    let inter = (0..x.len())
        .into_par_iter()
        .filter(|&i| {
            dy[i] <= 2.0 * res
                && x_index
                    .within(&x.points()[i].0, 4.0 * res)
                    .into_iter()
                    .all(|j| dy[j] >= dy[i])
        })
        .map(|i| x.points()[i].clone())
        .collect();
    (inter, dy)
}

/// Regular separation exponent of `X` and `Y` at `a`: fits
/// `d(x, Y) >= C d(x, X ∩ Y)^l` over `x ∈ X` with `|x - a| <= window`.
pub fn separation_exponent(
    x: &PointCloud,
    y: &PointCloud,
    a: &Point,
    window: f64,
    bins: usize,
) -> Result<ExponentFit> {
    fit_envelope(&separation_samples(x, y, a, window)?, bins)
}

/// The `(u, v)` pairs behind [`separation_exponent`].
pub fn separation_samples(
    x: &PointCloud,
    y: &PointCloud,
    a: &Point,
    window: f64,
) -> Result<Vec<(f64, f64)>> {
    check_dim(x.dim(), y.dim())?;
    check_dim(x.dim(), a.dim())?;
    if !(window > 0.0) {
        return Err(invalid("window radius must be positive"));
    }
    let res = x.resolution().max(y.resolution());
    let y_index = NearestIndex::new(y.dim(), y.points());
    let (inter, dy) = sampled_intersection(x, &y_index, res);
    if inter.is_empty() {
        return Err(Error::EmptySet(
            "sampled intersection of X and Y is empty".into(),
        ));
    }
    let i_index = NearestIndex::new(x.dim(), &inter);
    if i_index.dist(&a.0) > 2.0 * res {
        return Err(invalid(
            "base point is not within resolution of the sampled intersection",
        ));
    }
    let near: Vec<usize> = (0..x.len())
        .filter(|&i| x.points()[i].dist(a) <= window)
        .collect();
    if near.iter().all(|&i| dy[i] < 3.0 * res) {
        return Err(Error::FitRejected(
            "d(x, Y) vanishes on X near the base point, which lies inside X ∩ Y".into(),
        ));
    }
    let r_min = 10.0 * res;
    let samples: Vec<(f64, f64)> = near
        .par_iter()
        .filter_map(|&i| {
            let u = i_index.dist(&x.points()[i].0);
            let v = dy[i];
            (u >= r_min && v > 0.0).then_some((u, v))
        })
        .collect();
    Ok(samples)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgradientExponentOptions {
    pub bins: usize,
    /// Reject functions whose subgradient at 0 does not contain 0.
    pub require_critical_origin: bool,
}

impl Default for SubgradientExponentOptions {
    fn default() -> Self {
        SubgradientExponentOptions {
            bins: DEFAULT_BINS,
            require_critical_origin: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgradientExponent {
    pub fit: ExponentFit,
    /// `h(0)`, the smallest norm in `∂f(0)`.
    pub h_at_origin: f64,
    pub theta_in_open_unit_interval: bool,
    /// Samples with `f(x) != 0` but `h(x) = 0`; they contradict any
    /// inequality `h >= c |f|^θ` and are left out of the fit.
    pub critical_nonzero_samples: usize,
    /// The `(|f|, h)` pairs that were fitted.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

/// Kurdyka-Łojasiewicz type exponent: fits `h(x) >= c |f(x)|^θ` on grid
/// points `x` with `|x| <= 0.3 R`, `R` the window circumradius.
pub fn subgradient_exponent(
    f: &PiecewiseFn,
    window: &BoxDomain,
    grid_step: f64,
    cfg: &SubgradientConfig,
    opts: &SubgradientExponentOptions,
) -> Result<SubgradientExponent> {
    let m = f.arity();
    check_dim(m, window.dim())?;
    cfg.validate(m)?;
    let origin = Point::origin(m);
    if !window.contains(&origin.0, 0.0) {
        return Err(invalid("the window must contain the origin"));
    }
    let h0 = min_norm_subgradient(f, &origin, cfg)?;
    if opts.require_critical_origin && h0 > 3.0 * cfg.hull_tol {
        return Err(Error::NotCriticalAtOrigin { h0 });
    }
    let radius = 0.3 * window.circumradius();
    let grid = window.grid(grid_step, &[])?;
    let pairs: Vec<Option<(f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = Point(grid.point(i));
            if x.norm() > radius {
                return Ok(None);
            }
            let u = f.eval(&x.0)?.abs();
            if u == 0.0 {
                return Ok(None);
            }
            Ok(Some((u, min_norm_subgradient(f, &x, cfg)?)))
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(f64, f64)> = pairs.into_iter().flatten().collect();
    if pairs.is_empty() {
        return Err(Error::FitRejected("f vanishes on the window".into()));
    }
    let critical_nonzero_samples = pairs.iter().filter(|p| p.1 <= 3.0 * cfg.hull_tol).count();
    let samples: Vec<(f64, f64)> = pairs
        .into_iter()
        .filter(|p| p.1 > 3.0 * cfg.hull_tol)
        .collect();
    let fit = fit_envelope(&samples, opts.bins)?;
    Ok(SubgradientExponent {
        theta_in_open_unit_interval: fit.exponent > 0.0 && fit.exponent < 1.0,
        fit,
        h_at_origin: h0,
        critical_nonzero_samples,
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiConfig {
    pub grid_step: f64,
    /// Half-width of the level shell `||f(x)| - t| <= level_tol`.
    pub level_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiPoint {
    pub t: f64,
    pub phi: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiProfile {
    pub points: Vec<PhiPoint>,
    /// Defined values strictly increase with `t`.
    pub increasing: bool,
    /// Slope of `ln φ` against `ln t`; positive when `φ(t) -> 0`.
    pub log_slope: Option<f64>,
}

impl PhiProfile {
    pub fn vanishing(&self) -> bool {
        self.log_slope.is_some_and(|s| s > 0.0)
    }

    /// `(t, φ(t))` for every `t` with a value.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.phi.map(|v| (p.t, v)))
            .collect()
    }
}

/// `φ(t) = min{h(x) : x ∈ B(0, R), |f(x)| = t}` over grid points in the
/// level shells of `|f|`.
pub fn phi_profile(
    f: &PiecewiseFn,
    ball_radius: f64,
    t_grid: &[f64],
    cfg: &SubgradientConfig,
    phi: &PhiConfig,
) -> Result<PhiProfile> {
    let m = f.arity();
    cfg.validate(m)?;
    if !(ball_radius > 0.0) || !(phi.grid_step > 0.0) || !(phi.level_tol > 0.0) {
        return Err(invalid(
            "ball radius, grid step and level tolerance must be positive",
        ));
    }
    if t_grid.is_empty()
        || t_grid.iter().any(|t| !(*t > 0.0))
        || t_grid.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(invalid("t grid must be positive and increasing"));
    }
    let cube = BoxDomain::cube(&vec![0.0; m], ball_radius);
    let grid = cube.grid(phi.grid_step, &[])?;
    let (t_lo, t_hi) = (
        t_grid[0] - phi.level_tol,
        t_grid[t_grid.len() - 1] + phi.level_tol,
    );
    let shell: Vec<(Point, f64)> = (0..grid.len())
        .into_par_iter()
        .filter_map(|i| {
            let x = Point(grid.point(i));
            if x.norm() > ball_radius {
                return None;
            }
            match f.eval(&x.0) {
                Ok(v) if v.abs() >= t_lo && v.abs() <= t_hi => Some(Ok((x, v.abs()))),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            }
        })
        .collect::<Result<_>>()?;
    let in_some_shell: Vec<&(Point, f64)> = shell
        .iter()
        .filter(|(_, v)| t_grid.iter().any(|t| (v - t).abs() <= phi.level_tol))
        .collect();
    let hs: Vec<f64> = in_some_shell
        .par_iter()
        .map(|(x, _)| min_norm_subgradient(f, x, cfg))
        .collect::<Result<_>>()?;

    let points: Vec<PhiPoint> = t_grid
        .iter()
        .map(|&t| {
            let best = in_some_shell
                .iter()
                .zip(&hs)
                .filter(|((_, v), _)| (v - t).abs() <= phi.level_tol)
                .map(|(_, h)| *h)
                .fold(None, |acc: Option<f64>, h| {
                    Some(acc.map_or(h, |a| a.min(h)))
                });
            PhiPoint {
                t,
                phi: best,
                error: best
                    .is_none()
                    .then(|| format!("level shell |f| = {t} is empty on the ball")),
            }
        })
        .collect();
    let defined: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.phi.map(|v| (p.t, v)))
        .collect();
    let increasing = defined.windows(2).all(|w| w[1].1 > w[0].1);
    let logs: Vec<(f64, f64)> = defined
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    let log_slope = (logs.len() >= 2).then(|| fit_line(&logs).slope);
    Ok(PhiProfile {
        points,
        increasing,
        log_slope,
    })
}

/// A one-variable profile, either as a formula or as samples `(t, φ(t))`.
#[derive(Clone, Debug)]
pub enum Profile {
    Formula(ExprFn),
    Sampled(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneDimExponent {
    /// Envelope fit of `|φ'|` against `|φ|`.
    pub fit: ExponentFit,
    /// Leading exponent of `φ(t) ~ c t^α`.
    pub alpha: f64,
    /// `max(0, (α - 1) / α)`.
    pub theta: f64,
    /// Exponent of the direct envelope fit.
    pub theta_direct: f64,
    /// The `(|φ|, |φ'|)` pairs of the envelope fit.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

const ONE_DIM_SAMPLES: usize = 200;
const ONE_DIM_AGREEMENT: f64 = 0.05;

/// Gradient exponent of a profile vanishing at 0: the largest `θ` with
/// `|φ'(t)| >= c |φ(t)|^θ` near 0.
pub fn one_dim_gradient_exponent(
    phi: &Profile,
    t_window: (f64, f64),
    bins: usize,
) -> Result<OneDimExponent> {
    let (t_min, t_max) = t_window;
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(invalid("t window must satisfy 0 < t_min < t_max"));
    }
    let samples: Vec<(f64, f64, f64)> = match phi {
        Profile::Formula(f) => {
            check_dim(1, f.arity())?;
            if let Ok(p0) = f.eval(&[0.0]) {
                if p0.abs() > 1e-12 * f.eval(&[t_max])?.abs().max(1.0) {
                    return Err(Error::FitRejected(format!("φ(0) = {p0} is not zero")));
                }
            }
            let ratio = (t_max / t_min).ln();
            (0..ONE_DIM_SAMPLES)
                .map(|k| {
                    let t = t_min * (ratio * k as f64 / (ONE_DIM_SAMPLES - 1) as f64).exp();
                    let h = 1e-6 * t;
                    let d = (f.eval(&[t + h])? - f.eval(&[t - h])?) / (2.0 * h);
                    Ok((t, f.eval(&[t])?, d))
                })
                .collect::<Result<_>>()?
        }
        Profile::Sampled(pts) => {
            let inside: Vec<(f64, f64)> = pts
                .iter()
                .copied()
                .filter(|(t, _)| *t >= t_min && *t <= t_max)
                .collect();
            if inside.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(invalid("sampled profile must have increasing t"));
            }
            if inside.len() < 3 {
                return Err(Error::FitRejected(
                    "fewer than three profile samples in the window".into(),
                ));
            }
            (1..inside.len() - 1)
                .map(|i| {
                    let (t0, p0) = inside[i - 1];
                    let (t2, p2) = inside[i + 1];
                    (inside[i].0, inside[i].1, (p2 - p0) / (t2 - t0))
                })
                .collect()
        }
    };
    let logs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, p, _)| *p > 0.0)
        .map(|(t, p, _)| (t.ln(), p.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::FitRejected("φ is not positive on the window".into()));
    }
    let alpha = fit_line(&logs).slope;
    if !(alpha > 0.0) {
        return Err(Error::FitRejected(format!(
            "φ does not vanish at 0 (α = {alpha})"
        )));
    }
    let theta = ((alpha - 1.0) / alpha).max(0.0);
    let pairs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, p, d)| *p > 0.0 && d.abs() > 0.0)
        .map(|(_, p, d)| (p.abs(), d.abs()))
        .collect();
    let fit = fit_envelope(&pairs, bins)?;
    let theta_direct = fit.exponent;
    if (theta_direct.max(0.0) - theta).abs() > ONE_DIM_AGREEMENT {
        return Err(Error::FitRejected(format!(
            "log-log exponent gives θ = {theta} but the envelope fit gives {theta_direct}"
        )));
    }
    Ok(OneDimExponent {
        fit,
        alpha,
        theta,
        theta_direct,
        samples: pairs,
    })
}
