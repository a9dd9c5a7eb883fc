//! Numerical tame geometry on sampled sets.
//!
//! Closed sets are represented by [`PointCloud`]s with explicit resolution.
//! On top of that the crate provides Hausdorff and Kuratowski distances,
//! graph-based multifunctions, tangent cones, Clarke subgradients of
//! piecewise-smooth functions and empirical Lojasiewicz-type exponents.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cones;
pub mod error;
pub mod exponents;
pub mod expr;
pub mod io;
mod linalg;
pub mod metrics;
pub mod multifunctions;
pub mod sets;
pub mod subgradients;

pub use cones::{ConeConfig, ConePresentation, TangentCone};
pub use error::{Error, ErrorClass, Result};
pub use exponents::{ExponentFit, PhiConfig, Profile};
pub use expr::{EvalError, Expr, ExprFn};
pub use metrics::{
    compactify, hausdorff, hausdorff_sphere_extended, kuratowski_dist, stereo_forward,
    stereo_inverse, CompactifiedSet, SpherePoint,
};
pub use multifunctions::{KuratowskiLimit, MultifunctionGraph, PreImageMode};
pub use sets::{
    dist_point_set, intersect_sphere, restrict_ball, sample, BoxDomain, ImplicitSetSpec,
    NearestIndex, Point, PointCloud,
};
pub use subgradients::{Piece, PiecewiseFn, Polytope, ScalarField, SubgradientConfig};
