//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails if any check fails.
//!
//! Run with `cargo test -p tamegeo-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use tamegeo::cones::{conic_exponent, tangent_cone};
use tamegeo::exponents::SubgradientExponentOptions;
use tamegeo::exponents::{
    loj_function_exponent, one_dim_gradient_exponent, separation_exponent, subgradient_exponent,
};
use tamegeo::multifunctions::{
    kuratowski_liminf, kuratowski_limsup, pre_image, pre_image_point, section, PreImageMode,
};
use tamegeo::sets::sample;
use tamegeo::subgradients::{clarke_subgradient, critical_set_sample, min_norm_point};
use tamegeo::{
    kuratowski_dist, stereo_forward, stereo_inverse, BoxDomain, ConeConfig, Expr, ExprFn,
    ImplicitSetSpec, MultifunctionGraph, Piece, PiecewiseFn, Point, PointCloud, Polytope, Profile,
    ScalarField, SubgradientConfig,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn f2(e: Expr) -> ExprFn {
    ExprFn::new(2, e).unwrap()
}

fn curve(g: Expr, bounds: Vec<(f64, f64)>, step: f64, tol: f64) -> PointCloud {
    let spec = ImplicitSetSpec::new(2, vec![f2(g)], vec![], BoxDomain::new(bounds), tol).unwrap();
    sample(&spec, step, 0).unwrap()
}

fn abs_x_y() -> PiecewiseFn {
    let (x, y) = (Expr::var(0), Expr::var(1));
    PiecewiseFn::new(
        2,
        vec![
            Piece {
                region: vec![f2(x.clone())],
                value: f2(x.clone() * y.clone()),
                gradient: Some(vec![f2(y.clone()), f2(x.clone())]),
            },
            Piece {
                region: vec![f2(-x.clone())],
                value: f2(-(x.clone() * y.clone())),
                gradient: Some(vec![f2(-y), f2(-x)]),
            },
        ],
        2f64.sqrt(),
    )
    .unwrap()
}

fn angle_deg(d: &Point, target: [f64; 2]) -> f64 {
    let n = d.norm();
    ((d.0[0] * target[0] + d.0[1] * target[1]) / n)
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees()
}

fn function_exponent_of_root() -> Check {
    let f = ExprFn::new(1, Expr::var(0).abs().sqrt()).unwrap();
    let w = BoxDomain::new(vec![(-0.1, 0.1)]);
    let (fit, dt) = timed(|| loj_function_exponent(&f, &Point::from([0.0]), &w, 1e-4, 12));
    let fit = fit.map_err(|e| e.to_string())?;
    ensure(
        (0.45..=0.55).contains(&fit.exponent) && dt < Duration::from_secs(1),
        format!("exponent {:.4}, {:.3}s", fit.exponent, dt.as_secs_f64()),
    )
}

fn separation_exponent_of_root_graph() -> Check {
    let (fit, dt) = timed(|| {
        let bounds = vec![(-0.25, 0.25), (-0.01, 0.5)];
        let graph = curve(
            Expr::var(1) - Expr::var(0).abs().sqrt(),
            bounds.clone(),
            1e-3,
            1e-3,
        );
        let axis = curve(Expr::var(1), bounds, 1e-3, 1e-3);
        separation_exponent(&graph, &axis, &Point::origin(2), 0.5, 12)
    });
    let fit = fit.map_err(|e| e.to_string())?;
    ensure(
        (0.9..=1.1).contains(&fit.exponent) && dt < Duration::from_secs(5),
        format!("exponent {:.4}, {:.3}s", fit.exponent, dt.as_secs_f64()),
    )
}

/// Vertices of the subgradient of `|x| y` from its closed form.
fn abs_x_y_subgradient(x: f64, y: f64) -> Vec<[f64; 2]> {
    if x != 0.0 {
        vec![[x.signum() * y, x.abs()]]
    } else if y != 0.0 {
        vec![[-y.abs(), 0.0], [y.abs(), 0.0]]
    } else {
        vec![[0.0, 0.0]]
    }
}

fn clarke_subgradient_closed_form() -> Check {
    let f = abs_x_y();
    let cfg = SubgradientConfig::for_arity(2);
    let probes = [
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 2.0),
        (0.0, -2.0),
        (2.0, 0.0),
        (-2.0, 0.0),
        (0.0, 0.0),
    ];
    let mut worst: f64 = 0.0;
    for (x, y) in probes {
        let p = clarke_subgradient(&f, &Point::from([x, y]), &cfg)
            .map_err(|e| format!("({x},{y}): {e}"))?;
        let want = abs_x_y_subgradient(x, y);
        if p.vertices().len() != want.len() {
            return Err(format!("({x},{y}): {:?} vs {want:?}", p.vertices()));
        }
        for w in &want {
            let d = p
                .vertices()
                .iter()
                .map(|v| v.dist(&Point::from(*w)))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    ensure(
        worst <= 1e-6,
        format!("{} probes, max vertex error {worst:.2e}", probes.len()),
    )
}

fn subgradient_exponent_of_abs_x_y() -> Check {
    let f = abs_x_y();
    let w = BoxDomain::new(vec![(-1.0, 1.0), (-1.0, 1.0)]);
    let cfg = SubgradientConfig::for_arity(2);
    let (r, dt) =
        timed(|| subgradient_exponent(&f, &w, 5e-3, &cfg, &SubgradientExponentOptions::default()));
    let r = r.map_err(|e| e.to_string())?;
    ensure(
        (0.45..=0.55).contains(&r.fit.exponent) && dt < Duration::from_secs(30),
        format!("theta {:.4}, {:.3}s", r.fit.exponent, dt.as_secs_f64()),
    )
}

fn critical_points_have_zero_value() -> Check {
    let f = abs_x_y();
    let step = 0.02;
    let w = BoxDomain::new(vec![(-1.0, 1.0), (-1.0, 1.0)]);
    let crit = critical_set_sample(&f, &w, step, &SubgradientConfig::for_arity(2))
        .map_err(|e| e.to_string())?;
    let bound = 2.0 * f.lipschitz_bound() * step;
    let worst = crit
        .iter()
        .map(|p| f.value(&p.0).map(f64::abs).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    ensure(
        !crit.is_empty() && worst <= bound,
        format!(
            "{} critical samples, max |f| {worst:.2e} <= {bound:.2e}",
            crit.len()
        ),
    )
}

fn cusp() -> PointCloud {
    curve(
        Expr::var(1).powi(2) - Expr::var(0).powi(3),
        vec![(0.0, 0.1), (-0.04, 0.04)],
        4e-5,
        1e-6,
    )
}

fn parabola_near_origin() -> PointCloud {
    curve(
        Expr::var(1) - Expr::var(0).powi(2),
        vec![(-0.3, 0.3), (-0.02, 0.1)],
        1e-4,
        1e-4,
    )
}

fn tangent_cones() -> Check {
    let cfg = ConeConfig {
        t0: 0.05,
        ..ConeConfig::default()
    };
    let limit = Duration::from_secs(5);
    let mut notes = Vec::new();

    let (tc, dt) = timed(|| tangent_cone(&parabola_near_origin(), &Point::origin(2), &cfg));
    let tc = tc.map_err(|e| format!("parabola: {e}"))?;
    let dirs = &tc.cone.directions;
    let ok = dirs.len() == 2
        && dirs.iter().any(|d| angle_deg(d, [1.0, 0.0]) < 2.0)
        && dirs.iter().any(|d| angle_deg(d, [-1.0, 0.0]) < 2.0)
        && dt < limit;
    notes.push(format!(
        "parabola {} dirs {:.2}s",
        dirs.len(),
        dt.as_secs_f64()
    ));
    if !ok {
        return Err(format!("{notes:?} {dirs:?}"));
    }

    let (tc, dt) = timed(|| tangent_cone(&cusp(), &Point::origin(2), &cfg));
    let tc = tc.map_err(|e| format!("cusp: {e}"))?;
    let dirs = &tc.cone.directions;
    let ok = dirs.len() == 1 && angle_deg(&dirs[0], [1.0, 0.0]) < 2.0 && dt < limit;
    notes.push(format!("cusp {} dirs {:.2}s", dirs.len(), dt.as_secs_f64()));
    if !ok {
        return Err(format!("{notes:?} {dirs:?}"));
    }

    let (tc, dt) = timed(|| tangent_cone(&parabola_near_origin(), &Point::from([0.0, 0.05]), &cfg));
    let tc = tc.map_err(|e| format!("outside: {e}"))?;
    notes.push(format!(
        "outside flag {} {:.2}s",
        tc.outside_closure,
        dt.as_secs_f64()
    ));
    ensure(
        tc.outside_closure && tc.cone.directions.is_empty() && dt < limit,
        notes.join(", "),
    )
}

fn conic_exponents() -> Check {
    let cfg = ConeConfig {
        t0: 0.05,
        ..ConeConfig::default()
    };
    let radii: Vec<f64> = (0..7).map(|k| 0.2 * 0.8f64.powi(k)).collect();
    let par = conic_exponent(&parabola_near_origin(), &radii, &cfg)
        .map_err(|e| format!("parabola: {e}"))?;
    let radii: Vec<f64> = (0..7).map(|k| 0.04 * 0.8f64.powi(k)).collect();
    let cus = conic_exponent(&cusp(), &radii, &cfg).map_err(|e| format!("cusp: {e}"))?;
    ensure(
        (par.exponent - 2.0).abs() <= 0.1 && (cus.exponent - 1.5).abs() <= 0.1,
        format!("parabola {:.4}, cusp {:.4}", par.exponent, cus.exponent),
    )
}

fn random_cloud(rng: &mut ChaCha8Rng) -> PointCloud {
    let n = rng.random_range(0..30);
    let scale = 10f64.powf(rng.random_range(-1.0..2.0));
    let pts = (0..n)
        .map(|_| {
            Point::from([
                scale * rng.sample::<f64, _>(StandardNormal),
                scale * rng.sample::<f64, _>(StandardNormal),
            ])
        })
        .collect();
    PointCloud::from_points(2, pts, 1e-3).unwrap()
}

fn kuratowski_metric() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut slack: f64 = 0.0;
    for i in 0..200 {
        let (a, b, c) = (
            random_cloud(&mut rng),
            random_cloud(&mut rng),
            random_cloud(&mut rng),
        );
        let d = |x: &PointCloud, y: &PointCloud| kuratowski_dist(x, y).unwrap();
        if d(&a, &b) != d(&b, &a) {
            return Err(format!("triple {i}: asymmetric"));
        }
        if d(&a, &a) != 0.0 {
            return Err(format!("triple {i}: d(A, A) = {}", d(&a, &a)));
        }
        slack = slack.max(d(&a, &c) - d(&a, &b) - d(&b, &c));
    }
    if slack > 1e-12 {
        return Err(format!("triangle slack {slack:.2e}"));
    }
    let empty = PointCloud::empty(2, 1e-3, 1.0).unwrap();
    let ds: Vec<f64> = (0..=10)
        .map(|k| {
            let p =
                PointCloud::from_points(2, vec![Point::from([2f64.powi(k), 0.0])], 1e-3).unwrap();
            kuratowski_dist(&p, &empty).unwrap()
        })
        .collect();
    let decreasing = ds.windows(2).all(|w| w[1] < w[0]);
    ensure(
        decreasing && ds[10] < 0.01,
        format!(
            "triangle slack {slack:.1e}, escaping singleton at k=10: {:.2e}",
            ds[10]
        ),
    )
}

fn stereographic_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let dim = rng.random_range(1..=4);
        let scale = 10f64.powf(rng.random_range(-2.0..1.0));
        let y = Point(
            (0..dim)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        let back = stereo_forward(&stereo_inverse(&y).unwrap()).unwrap();
        worst = worst.max(back.dist(&y));
    }
    ensure(worst <= 1e-12, format!("max round-trip error {worst:.2e}"))
}

/// Sections straight from the definition: outputs of graph points whose
/// input is within `slab`.
fn brute_section(graph: &[(f64, f64)], slab: f64, x: f64) -> Vec<f64> {
    graph
        .iter()
        .filter(|(u, _)| (u - x).abs() <= slab)
        .map(|(_, v)| *v)
        .collect()
}

fn gap(from: &[f64], to: &[f64]) -> f64 {
    from.iter()
        .map(|a| {
            to.iter()
                .map(|b| (a - b).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

fn closest(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (x - y).abs()))
        .fold(f64::INFINITY, f64::min)
}

fn sorted_xs(c: &PointCloud) -> Vec<f64> {
    let mut v: Vec<f64> = c.iter().map(|p| p.0[0]).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn pre_images_match_brute_force() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (res, slab) = (0.004, 0.012);
    let mut nonempty = 0;
    for trial in 0..50 {
        let len = rng.random_range(5..=200);
        let graph: Vec<(f64, f64)> = (0..len)
            .map(|_| {
                (
                    rng.random_range(-40..=40) as f64 * 0.01,
                    rng.random_range(-10..=10) as f64 * 0.05 + rng.random_range(-0.01..0.01),
                )
            })
            .collect();
        let cloud = PointCloud::from_points(
            2,
            graph.iter().map(|&(x, y)| Point::from([x, y])).collect(),
            res,
        )
        .unwrap();
        let f = MultifunctionGraph::new(1, 1, cloud, slab).unwrap();
        let tau = f.tolerance();
        let mut dom: Vec<f64> = graph.iter().map(|g| g.0).collect();
        dom.sort_by(f64::total_cmp);
        dom.dedup();

        let a = graph[rng.random_range(0..len)].0;
        let fa = brute_section(&graph, slab, a);
        let modes = [
            (PreImageMode::Strong, "strong"),
            (PreImageMode::Lower, "lower"),
            (PreImageMode::Upper, "upper"),
            (PreImageMode::Weak, "weak"),
        ];
        for (mode, name) in modes {
            let want: Vec<f64> = dom
                .iter()
                .copied()
                .filter(|&x| {
                    let fx = brute_section(&graph, slab, x);
                    !fx.is_empty()
                        && match mode {
                            PreImageMode::Strong => gap(&fx, &fa).max(gap(&fa, &fx)) <= tau,
                            PreImageMode::Lower => gap(&fx, &fa) <= tau,
                            PreImageMode::Upper => gap(&fa, &fx) <= tau,
                            PreImageMode::Weak => closest(&fx, &fa) <= tau,
                        }
                })
                .collect();
            let got =
                sorted_xs(&pre_image(&f, &Point::from([a]), mode).map_err(|e| e.to_string())?);
            if got != want {
                return Err(format!("trial {trial} {name}: {got:?} vs {want:?}"));
            }
        }
        let y = graph[rng.random_range(0..len)].1;
        let want: Vec<f64> = dom
            .iter()
            .copied()
            .filter(|&x| closest(&brute_section(&graph, slab, x), &[y]) <= tau)
            .collect();
        let got = sorted_xs(&pre_image_point(&f, &Point::from([y])).map_err(|e| e.to_string())?);
        if got != want {
            return Err(format!("trial {trial} point: {got:?} vs {want:?}"));
        }
        nonempty += usize::from(want.len() > 1);
    }
    ensure(
        nonempty > 0,
        format!("50 graphs x 5 modes, {nonempty} with multi-point pre-images"),
    )
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let k = a[r][c] / a[c][c];
            let (top, bottom) = a.split_at_mut(r);
            for (x, p) in bottom[0][c..n].iter_mut().zip(&top[c][c..n]) {
                *x -= k * p;
            }
            b[r] -= k * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimum norm over the hull by enumerating every face: for each subset
/// of at most `dim + 1` vertices, the min-norm point of its affine hull is
/// kept if its barycentric weights are nonnegative.
fn min_norm_by_faces(pts: &[Vec<f64>]) -> f64 {
    let dim = pts[0].len();
    let n = pts.len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        if k > dim + 1 {
            continue;
        }
        // [G 1; 1^T 0] [w; mu] = [0; 1] with G the Gram matrix
        let mut a = vec![vec![0.0; k + 1]; k + 1];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[r][c] = pts[i].iter().zip(&pts[j]).map(|(x, y)| x * y).sum();
            }
            a[r][k] = 1.0;
            a[k][r] = 1.0;
        }
        let mut b = vec![0.0; k + 1];
        b[k] = 1.0;
        let Some(sol) = solve(a, b) else { continue };
        if sol[..k].iter().any(|w| *w < -1e-12) {
            continue;
        }
        let q: Vec<f64> = (0..dim)
            .map(|d| idx.iter().zip(&sol).map(|(&i, w)| w * pts[i][d]).sum())
            .collect();
        best = best.min(q.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    best
}

/// Smallest norm over a dense lattice of convex weights.
fn min_norm_dense(pts: &[Vec<f64>], levels: usize) -> f64 {
    fn rec(pts: &[Vec<f64>], levels: usize, left: usize, acc: Vec<f64>, best: &mut f64) {
        if pts.len() == 1 {
            let q: Vec<f64> = acc
                .iter()
                .zip(&pts[0])
                .map(|(s, p)| s + left as f64 / levels as f64 * p)
                .collect();
            *best = best.min(q.iter().map(|v| v * v).sum::<f64>().sqrt());
            return;
        }
        for w in 0..=left {
            let q: Vec<f64> = acc
                .iter()
                .zip(&pts[0])
                .map(|(s, p)| s + w as f64 / levels as f64 * p)
                .collect();
            rec(&pts[1..], levels, left - w, q, best);
        }
    }
    let mut best = f64::INFINITY;
    rec(pts, levels, levels, vec![0.0; pts[0].len()], &mut best);
    best
}

fn min_norm_point_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let dim = 2 + trial % 2;
        let n = rng.random_range(2..=6);
        let shift: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                shift
                    .iter()
                    .map(|s| s + rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        let exact = min_norm_by_faces(&pts);
        let dense = min_norm_dense(&pts, 40);
        if exact > dense + 1e-12 {
            return Err(format!(
                "trial {trial}: face oracle {exact} above dense grid {dense}"
            ));
        }
        let poly = Polytope::new(dim, pts.iter().map(|p| Point(p.clone())).collect(), 1e-12)
            .map_err(|e| e.to_string())?;
        let (q, h) = min_norm_point(&poly, 1e-24).map_err(|e| format!("trial {trial}: {e}"))?;
        if (q.norm() - h).abs() > 1e-12 {
            return Err(format!(
                "trial {trial}: reported h {h} but |q| = {}",
                q.norm()
            ));
        }
        worst = worst.max((h - exact).abs());
    }
    ensure(worst <= 1e-5, format!("max discrepancy {worst:.2e}"))
}

fn one_dim_exponents() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for alpha in [1.5, 2.0, 3.0] {
        let phi =
            Profile::Formula(ExprFn::new(1, Expr::var(0).powq((2.0 * alpha) as i32, 2)).unwrap());
        let r = one_dim_gradient_exponent(&phi, (1e-3, 1e-1), 12)
            .map_err(|e| format!("alpha {alpha}: {e}"))?;
        let want = (alpha - 1.0) / alpha;
        ok &= (r.theta - want).abs() <= 0.03;
        notes.push(format!(
            "alpha {alpha}: theta {:.4} (want {want:.4})",
            r.theta
        ));
    }
    ensure(ok, notes.join(", "))
}

fn kuratowski_limits() -> Check {
    let res = 1e-3;
    let mut pts = Vec::new();
    for i in 1..=500 {
        let x = i as f64 * 1e-3;
        pts.push(Point::from([x, 1.0]));
        pts.push(Point::from([-x, -1.0]));
    }
    pts.push(Point::from([0.0, 0.0]));
    let sign =
        MultifunctionGraph::new(1, 1, PointCloud::from_points(2, pts, res).unwrap(), res).unwrap();
    let radii = tamegeo::multifunctions::default_radii(0.4);
    let a = Point::from([0.0]);
    let sup = kuratowski_limsup(&sign, &a, &radii).map_err(|e| e.to_string())?;
    let inf = kuratowski_liminf(&sign, &a, &radii).map_err(|e| e.to_string())?;
    let tol = 2.0 * res;
    let mut ys = sorted_xs(&sup.points);
    ys.dedup_by(|p, q| (*p - *q).abs() <= tol);
    let sign_inf = inf.points.len();
    let sign_ok = ys.len() == 2
        && (ys[0] + 1.0).abs() <= tol
        && (ys[1] - 1.0).abs() <= tol
        && inf.points.is_empty();

    // y = x^2 - x is continuous, so both limits at 0.5 recover F(0.5) = -0.25
    let poly = MultifunctionGraph::sample(
        1,
        1,
        &ImplicitSetSpec::new(
            2,
            vec![f2(Expr::var(1) - Expr::var(0).powi(2) + Expr::var(0))],
            vec![],
            BoxDomain::new(vec![(-1.0, 1.5), (-1.0, 1.0)]),
            1e-3,
        )
        .unwrap(),
        1e-3,
        2e-3,
        0,
    )
    .map_err(|e| e.to_string())?;
    let a = Point::from([0.5]);
    let fa = section(&poly, &a).map_err(|e| e.to_string())?;
    let sup = kuratowski_limsup(&poly, &a, &radii).map_err(|e| e.to_string())?;
    let inf = kuratowski_liminf(&poly, &a, &radii).map_err(|e| e.to_string())?;
    let within = |c: &PointCloud| {
        !c.is_empty()
            && c.iter()
                .all(|p| fa.iter().any(|q| p.dist(q) <= poly.tolerance()))
            && fa
                .iter()
                .all(|q| c.iter().any(|p| p.dist(q) <= poly.tolerance()))
    };
    let cont_ok = within(&sup.points) && within(&inf.points);
    ensure(
        sign_ok && cont_ok,
        format!(
            "sign limsup {ys:?}, liminf {sign_inf} points; continuity limsup {} / liminf {} points vs F(a) {}",
            sup.points.len(),
            inf.points.len(),
            fa.len()
        ),
    )
}

#[test]
fn acceptance() {
    let checks: [Criterion; 13] = [
        ("function exponent of sqrt|x|", function_exponent_of_root),
        (
            "separation exponent of the sqrt|x| graph",
            separation_exponent_of_root_graph,
        ),
        ("Clarke subgradient of |x|y", clarke_subgradient_closed_form),
        (
            "subgradient exponent of |x|y",
            subgradient_exponent_of_abs_x_y,
        ),
        (
            "critical points have zero value",
            critical_points_have_zero_value,
        ),
        ("tangent cones", tangent_cones),
        ("conic exponents", conic_exponents),
        ("Kuratowski metric", kuratowski_metric),
        ("stereographic round trip", stereographic_round_trip),
        ("pre-images vs brute force", pre_images_match_brute_force),
        ("min-norm point vs face enumeration", min_norm_point_oracle),
        ("one-dimensional gradient exponent", one_dim_exponents),
        ("Kuratowski limits", kuratowski_limits),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
