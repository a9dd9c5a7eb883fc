//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tamegeo::{PiecewiseFn, Point, PointCloud, Polytope};

/// `n` uniform points in `[-1, 1]^dim`.
pub fn random_cloud(dim: usize, n: usize, resolution: f64, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| Point((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    PointCloud::from_points(dim, points, resolution).expect("valid cloud")
}

/// Hull of `n` random points in `[0.5, 2] x [-1, 1]^(dim-1)`, so the
/// minimum-norm point lies on a nontrivial face.
pub fn random_polytope(dim: usize, n: usize, seed: u64) -> Polytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let mut c: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            c[0] = rng.random_range(0.5..2.0);
            Point(c)
        })
        .collect();
    Polytope::new(dim, points, 1e-9).expect("valid polytope")
}

/// `f(x, y) = |x| y` with analytic piece gradients.
pub fn abs_x_times_y() -> PiecewiseFn {
    serde_json::from_str(
        r#"{"arity":2,"lipschitz_bound":3,"pieces":[
          {"region":[["var",0]],"value":["*",["var",0],["var",1]],"gradient":[["var",1],["var",0]]},
          {"region":[["-",["var",0]]],"value":["-",["*",["var",0],["var",1]]],
           "gradient":[["-",["var",1]],["-",["var",0]]]}]}"#,
    )
    .expect("valid function")
}
