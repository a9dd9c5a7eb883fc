//! Hausdorff distance on compact samples and its extension to all closed
//! sets through the one-point compactification of `R^n`.
//!
//! `R^n` is identified with the hyperplane `x_{n+1} = -1` of `R^{n+1}` and
//! the unit sphere is projected onto it from the north pole
//! `p = (0, ..., 0, 1)`. Closed sets are mapped to the sphere, the pole is
//! adjoined, and the chordal Hausdorff distance of the images is taken.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, invalid, Error, Result};
use crate::sets::{dist, norm, NearestIndex, Point, PointCloud};

/// Diameter of the unit sphere in the chordal metric.
pub const SPHERE_DIAMETER: f64 = 2.0;

/// Extended Hausdorff distance between an empty and a nonempty subset of
/// the sphere.
pub const EMPTY_SENTINEL: f64 = SPHERE_DIAMETER + 1.0;

const UNIT_TOL: f64 = 1e-12;

/// A point of the unit sphere `S^n ⊂ R^{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint(Point);

impl SpherePoint {
    pub fn new(coords: Point) -> Result<SpherePoint> {
        if coords.dim() < 2 {
            return Err(invalid("sphere points need at least two coordinates"));
        }
        let n = coords.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(invalid(format!("point {coords:?} has norm {n}, not 1")));
        }
        Ok(SpherePoint(coords))
    }

    /// The north pole of `S^n`.
    pub fn pole(n: usize) -> SpherePoint {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        SpherePoint(Point(c))
    }

    /// The south pole of `S^n`, image of the origin of `R^n`.
    pub fn south_pole(n: usize) -> SpherePoint {
        let mut c = vec![0.0; n + 1];
        c[n] = -1.0;
        SpherePoint(Point(c))
    }

    pub fn coords(&self) -> &Point {
        &self.0
    }

    /// Dimension `n` of the sphere (ambient dimension minus one).
    pub fn sphere_dim(&self) -> usize {
        self.0.dim() - 1
    }

    pub fn is_pole(&self) -> bool {
        let c = &self.0 .0;
        let n = c.len() - 1;
        c[n] == 1.0 && c[..n].iter().all(|v| *v == 0.0)
    }
}

/// Stereographic projection from the north pole, dropping the constant last
/// coordinate `-1`: `y_i = 2 x_i / (1 - x_{n+1})`.
///
/// Near the pole `1 - x_{n+1}` is evaluated as `|x'|^2 / (1 + x_{n+1})`,
/// which is exact on the sphere and avoids cancellation.
pub fn stereo_forward(x: &SpherePoint) -> Result<Point> {
    let c = &x.0 .0;
    let n = c.len() - 1;
    let last = c[n];
    let head = &c[..n];
    let denom = if last > 0.0 {
        head.iter().map(|v| v * v).sum::<f64>() / (1.0 + last)
    } else {
        1.0 - last
    };
    if denom == 0.0 || x.is_pole() {
        return Err(Error::NorthPole);
    }
    Ok(Point(head.iter().map(|v| 2.0 * v / denom).collect()))
}

/// Inverse of [`stereo_forward`]: the second intersection of the line
/// through `p` and `(y, -1)` with the sphere,
/// `h(y) = (4y, |y|^2 - 4) / (|y|^2 + 4)`.
pub fn stereo_inverse(y: &Point) -> Result<SpherePoint> {
    if y.dim() == 0 || !y.is_finite() {
        return Err(invalid(format!("cannot project {y:?} to the sphere")));
    }
    let s: f64 = y.0.iter().map(|v| v * v).sum();
    if !s.is_finite() {
        return Err(invalid(format!("point {y:?} is too large to project")));
    }
    let d = s + 4.0;
    let mut c: Vec<f64> = y.0.iter().map(|v| 4.0 * v / d).collect();
    c.push((s - 4.0) / d);
    SpherePoint::new(Point(c))
}

/// Hausdorff distance between raw point lists of the same dimension;
/// `0` when both are empty and `+inf` when exactly one is.
pub(crate) fn hausdorff_points(dim: usize, a: &[Point], b: &[Point]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        (false, false) => {
            let ia = NearestIndex::new(dim, a);
            let ib = NearestIndex::new(dim, b);
            ib.directed_hausdorff(a).max(ia.directed_hausdorff(b))
        }
    }
}

/// `max_{a in A} d(a, B)`; `+inf` if `B` is empty and `A` is not.
pub(crate) fn directed_hausdorff(dim: usize, a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    NearestIndex::new(dim, b).directed_hausdorff(a)
}

/// Hausdorff distance between two samples. With exactly one side empty the
/// result is `+inf`; two empty samples are at distance `0`.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(hausdorff_points(a.dim(), a.points(), b.points()))
}

/// A closed subset of `S^n` given by sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactifiedSet {
    sphere_points: Vec<SpherePoint>,
    includes_pole: bool,
}

impl CompactifiedSet {
    pub fn new(sphere_points: Vec<SpherePoint>) -> Result<CompactifiedSet> {
        if let Some(first) = sphere_points.first() {
            let d = first.0.dim();
            for p in &sphere_points {
                check_dim(d, p.0.dim())?;
            }
        }
        let includes_pole = sphere_points.iter().any(SpherePoint::is_pole);
        Ok(CompactifiedSet {
            sphere_points,
            includes_pole,
        })
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.sphere_points
    }

    pub fn includes_pole(&self) -> bool {
        self.includes_pole
    }

    pub fn is_empty(&self) -> bool {
        self.sphere_points.is_empty()
    }

    fn ambient_dim(&self) -> Option<usize> {
        self.sphere_points.first().map(|p| p.0.dim())
    }
}

/// Chordal Hausdorff distance on the sphere, extended by
/// [`EMPTY_SENTINEL`] when exactly one side is empty.
pub fn hausdorff_sphere_extended(s: &CompactifiedSet, t: &CompactifiedSet) -> Result<f64> {
    match (s.ambient_dim(), t.ambient_dim()) {
        (None, None) => Ok(0.0),
        (None, Some(_)) | (Some(_), None) => Ok(EMPTY_SENTINEL),
        (Some(ds), Some(dt)) => {
            check_dim(ds, dt)?;
            let a: Vec<Point> = s.sphere_points.iter().map(|p| p.0.clone()).collect();
            let b: Vec<Point> = t.sphere_points.iter().map(|p| p.0.clone()).collect();
            Ok(hausdorff_points(ds, &a, &b))
        }
    }
}

/// Image of the sample on the sphere with the pole adjoined.
pub fn compactify(a: &PointCloud) -> Result<CompactifiedSet> {
    let mut pts = a.iter().map(stereo_inverse).collect::<Result<Vec<_>>>()?;
    pts.push(SpherePoint::pole(a.dim()));
    CompactifiedSet::new(pts)
}

/// Kuratowski distance between closed sets: chordal Hausdorff distance of
/// their compactified images. Always finite, bounded by the sphere diameter.
pub fn kuratowski_dist(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    hausdorff_sphere_extended(&compactify(a)?, &compactify(b)?)
}

/// Largest observed ratio `|h(y) - h(z)| / |y - z|` over random pairs in the
/// closed ball of radius `radius` of `R^dim`, together with short secants
/// (length `1e-6 radius`) centred at the ball's centre and at random points.
/// Long secants alone underestimate the local stretch near its maximum.
pub fn measured_inverse_lipschitz(dim: usize, radius: f64, pairs: usize, seed: u64) -> Result<f64> {
    if dim == 0 || !(radius > 0.0) {
        return Err(invalid("need positive dimension and radius"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ball_point = |rng: &mut ChaCha8Rng| loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-radius..=radius))
            .collect();
        if norm(&v) <= radius {
            return Point(v);
        }
    };
    let ratio = |y: &Point, z: &Point| -> Result<f64> {
        let d = y.dist(z);
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok(dist(&stereo_inverse(y)?.0 .0, &stereo_inverse(z)?.0 .0) / d)
    };
    let half = 0.5e-6 * radius;
    let mut best = 0.0f64;
    for k in 0..pairs {
        let y = ball_point(&mut rng);
        let z = ball_point(&mut rng);
        best = best.max(ratio(&y, &z)?);

        let c = if k == 0 {
            Point::origin(dim)
        } else {
            ball_point(&mut rng)
        };
        let u = ball_point(&mut rng);
        let n = u.norm();
        if n > 0.0 {
            let step: Vec<f64> = u.0.iter().map(|v| v / n * half).collect();
            let y = Point(c.0.iter().zip(&step).map(|(a, b)| a + b).collect());
            let z = Point(c.0.iter().zip(&step).map(|(a, b)| a - b).collect());
            best = best.max(ratio(&y, &z)?);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(dim: usize, pts: Vec<Vec<f64>>) -> PointCloud {
        PointCloud::from_points(dim, pts.into_iter().map(Point).collect(), 1e-3).unwrap()
    }

    #[test]
    fn south_pole_maps_to_origin() {
        assert_eq!(
            stereo_forward(&SpherePoint::south_pole(2)).unwrap(),
            Point::from([0.0, 0.0])
        );
    }

    #[test]
    fn equator_maps_to_two() {
        let e = SpherePoint::new(Point::from([1.0, 0.0, 0.0])).unwrap();
        assert_eq!(stereo_forward(&e).unwrap(), Point::from([2.0, 0.0]));
    }

    #[test]
    fn pole_has_no_image() {
        assert_eq!(stereo_forward(&SpherePoint::pole(3)), Err(Error::NorthPole));
    }

    #[test]
    fn origin_goes_to_south_pole() {
        assert_eq!(
            stereo_inverse(&Point::from([0.0, 0.0])).unwrap(),
            SpherePoint::south_pole(2)
        );
    }

    #[test]
    fn round_trip_example() {
        let y = Point::from([3.0, -7.0]);
        let back = stereo_forward(&stereo_inverse(&y).unwrap()).unwrap();
        assert!(back.dist(&y) <= 1e-12);
    }

    #[test]
    fn line_sphere_intersection_oracle() {
        // Independent route: solve |p + t(q - p)|^2 = 1 for t != 0 by the
        // quadratic formula and compare with the closed form.
        let y = [0.3, -1.7, 2.2];
        let p = [0.0, 0.0, 0.0, 1.0];
        let q = [y[0], y[1], y[2], -1.0];
        let dir: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
        let a: f64 = dir.iter().map(|v| v * v).sum();
        let b: f64 = 2.0 * dir.iter().zip(&p).map(|(d, pp)| d * pp).sum::<f64>();
        let t = -b / a;
        let expect: Vec<f64> = p.iter().zip(&dir).map(|(pp, d)| pp + t * d).collect();
        let got = stereo_inverse(&Point::from(y)).unwrap();
        assert!(dist(&expect, &got.coords().0) < 1e-14);
    }

    #[test]
    fn inverse_approaches_pole_monotonically() {
        let p = SpherePoint::pole(2);
        let d: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|t| {
                stereo_inverse(&Point::from([*t, 0.0]))
                    .unwrap()
                    .coords()
                    .dist(p.coords())
            })
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2]);
    }

    #[test]
    fn hausdorff_examples() {
        let seg = cloud(2, (0..=100).map(|i| vec![i as f64 / 100.0, 0.0]).collect());
        let origin = cloud(2, vec![vec![0.0, 0.0]]);
        assert!((hausdorff(&seg, &origin).unwrap() - 1.0).abs() <= seg.resolution());
        assert_eq!(hausdorff(&seg, &seg).unwrap(), 0.0);
        let empty = PointCloud::empty(2, 1e-3, 1.0).unwrap();
        assert_eq!(hausdorff(&seg, &empty).unwrap(), f64::INFINITY);
        assert_eq!(hausdorff(&empty, &empty).unwrap(), 0.0);
        assert!(hausdorff(&seg, &cloud(1, vec![vec![0.0]])).is_err());
    }

    #[test]
    fn extended_hausdorff_on_sphere() {
        let p = SpherePoint::pole(2);
        let s = CompactifiedSet::new(vec![p.clone()]).unwrap();
        let t = CompactifiedSet::new(vec![p, SpherePoint::south_pole(2)]).unwrap();
        assert_eq!(hausdorff_sphere_extended(&s, &t).unwrap(), 2.0);
        assert_eq!(hausdorff_sphere_extended(&t, &t).unwrap(), 0.0);
        let e = CompactifiedSet::new(vec![]).unwrap();
        assert_eq!(hausdorff_sphere_extended(&s, &e).unwrap(), 3.0);
        assert_eq!(hausdorff_sphere_extended(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn compactify_adds_pole() {
        let empty = PointCloud::empty(2, 0.1, 1.0).unwrap();
        let c = compactify(&empty).unwrap();
        assert_eq!(c.points(), &[SpherePoint::pole(2)]);
        assert!(c.includes_pole());
        let z = compactify(&cloud(2, vec![vec![0.0, 0.0]])).unwrap();
        assert_eq!(
            z.points(),
            &[SpherePoint::south_pole(2), SpherePoint::pole(2)]
        );
        let ray = cloud(2, (0..=100).map(|i| vec![i as f64 / 10.0, 0.0]).collect());
        for p in compactify(&ray).unwrap().points() {
            assert!((p.coords().norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn kuratowski_examples() {
        let a = cloud(1, vec![vec![0.0]]);
        let empty = PointCloud::empty(1, 1e-3, 1.0).unwrap();
        assert_eq!(kuratowski_dist(&a, &a).unwrap(), 0.0);
        assert!((kuratowski_dist(&a, &empty).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn escaping_points_converge_to_empty_set() {
        let empty = PointCloud::empty(1, 1e-3, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let nu = 2f64.powi(k);
            let d = kuratowski_dist(&cloud(1, vec![vec![nu]]), &empty).unwrap();
            // chord |h(nu) - p| = 4 / sqrt(nu^2 + 4)
            assert!((d - 4.0 / (nu * nu + 4.0).sqrt()).abs() < 1e-14);
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 0.01);
        let d400 = kuratowski_dist(&cloud(1, vec![vec![400.0]]), &empty).unwrap();
        assert!(d400 < 0.01);
    }

    #[test]
    fn inverse_projection_is_one_lipschitz_on_unit_ball() {
        let l = measured_inverse_lipschitz(2, 1.0, 2000, 3).unwrap();
        assert!(l <= 1.0 + 1e-12 && l > 0.5, "{l}");
    }
}
