use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ImplicitSetSpec, Point, PointCloud};
use crate::error::{invalid, Error, Result};
use crate::expr::ExprFn;
use crate::linalg;

/// Maximum number of damped Gauss-Newton steps used to pull a grid point
/// onto the equality constraints.
pub const REFINE_STEPS: usize = 20;

const CHUNK: usize = 4096;

/// Samples an implicit set on a regular grid.
///
/// Grid points satisfying every inequality and `|g| <= equality_tolerance`
/// for every equality are kept, then pulled towards the equality set by up
/// to [`REFINE_STEPS`] damped Gauss-Newton steps. A refined point is kept if
/// its residual is at most `equality_tolerance / 10` and it still satisfies
/// the inequalities and the box; otherwise the raw grid point is kept only
/// if it already meets that residual, and is dropped if not.
///
/// Seed `0` anchors the grid at the lower box corner; any other seed shifts
/// it by a reproducible random offset in `[0, grid_step)` per axis.
pub fn sample(spec: &ImplicitSetSpec, grid_step: f64, seed: u64) -> Result<PointCloud> {
    let bounds = spec.bounds();
    bounds.validate()?;
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(invalid(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    if grid_step > bounds.shortest_edge() {
        return Err(invalid(format!(
            "grid step {grid_step} exceeds the shortest box edge {}",
            bounds.shortest_edge()
        )));
    }
    let offset: Vec<f64> = if seed == 0 {
        vec![0.0; spec.dim()]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..spec.dim())
            .map(|_| rng.random::<f64>() * grid_step)
            .collect()
    };
    let grid = bounds.grid(grid_step, &offset)?;
    let total = grid.len();
    let chunks = total.div_ceil(CHUNK);

    let per_chunk: Vec<Result<Vec<Point>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::new();
            let mut x = vec![0.0; spec.dim()];
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                grid.point_into(idx, &mut x);
                if let Some(p) = classify(spec, &x)? {
                    out.push(Point(p));
                }
            }
            Ok(out)
        })
        .collect();

    let mut points = Vec::new();
    for chunk in per_chunk {
        points.extend(chunk?);
    }
    let resolution = grid_step * (spec.dim() as f64).sqrt();
    PointCloud::new(spec.dim(), points, resolution, bounds.circumradius())
}

fn eval_at(f: &ExprFn, x: &[f64]) -> Result<f64> {
    f.eval(x).map_err(|e| match e {
        Error::Eval(source) => Error::Domain {
            point: x.to_vec(),
            source,
        },
        other => other,
    })
}

fn classify(spec: &ImplicitSetSpec, x: &[f64]) -> Result<Option<Vec<f64>>> {
    for h in spec.inequalities() {
        if eval_at(h, x)? < 0.0 {
            return Ok(None);
        }
    }
    if spec.equalities().is_empty() {
        return Ok(Some(x.to_vec()));
    }
    let tol = spec.equality_tolerance();
    let mut raw = 0.0f64;
    for g in spec.equalities() {
        raw = raw.max(eval_at(g, x)?.abs());
    }
    if raw > tol {
        return Ok(None);
    }
    let target = tol / 10.0;
    if let Some((y, res)) = refine(spec.equalities(), x, tol) {
        if res <= target && admissible(spec, &y) {
            return Ok(Some(y));
        }
    }
    Ok((raw <= target).then(|| x.to_vec()))
}

fn admissible(spec: &ImplicitSetSpec, y: &[f64]) -> bool {
    spec.bounds().contains(y, 0.0)
        && spec
            .inequalities()
            .iter()
            .all(|h| matches!(h.eval(y), Ok(v) if v >= 0.0))
}

fn residuals(eqs: &[ExprFn], x: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut r = Vec::with_capacity(eqs.len());
    let mut jac = Vec::with_capacity(eqs.len());
    for g in eqs {
        let (v, grad) = g.eval_grad(x).ok()?;
        r.push(v);
        jac.push(grad);
    }
    Some((r, jac))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Gauss-Newton on the stacked equality residuals, minimum-norm
/// steps `J^T (J J^T)^{-1} r` with step halving until the residual drops.
/// Returns the last iterate and its residual.
fn refine(eqs: &[ExprFn], x0: &[f64], tol: f64) -> Option<(Vec<f64>, f64)> {
    let (mut r, mut jac) = residuals(eqs, x0)?;
    let mut x = x0.to_vec();
    let mut res = max_abs(&r);
    let m = eqs.len();
    for _ in 0..REFINE_STEPS {
        if res <= tol * 1e-12 {
            break;
        }
        if jac.iter().flatten().any(|v| !v.is_finite()) {
            break;
        }
        let gram: Vec<f64> = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| linalg::dot(&jac[i], &jac[j]))
            .collect();
        let Some(lambda) = linalg::solve(gram, r.clone()) else {
            break;
        };
        let mut delta = vec![0.0; x.len()];
        for (l, row) in lambda.iter().zip(&jac) {
            for (d, g) in delta.iter_mut().zip(row) {
                *d += l * g;
            }
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let xn: Vec<f64> = x
                .iter()
                .zip(&delta)
                .map(|(xi, di)| xi - alpha * di)
                .collect();
            if let Some((rn, jn)) = residuals(eqs, &xn) {
                let resn = max_abs(&rn);
                if resn < res {
                    x = xn;
                    r = rn;
                    jac = jn;
                    res = resn;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some((x, res))
}
