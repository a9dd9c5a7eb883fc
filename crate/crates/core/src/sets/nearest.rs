use rayon::prelude::*;

use super::{dist, Point};

/// Exact nearest-neighbour queries over a fixed point set.
///
/// A k-d tree with bounding boxes per node. Pruning uses box distances,
/// which never exceed the computed point distances, and distances are
/// computed exactly as [`dist`] does, so results agree bit-for-bit with a
/// brute-force scan (ties go to the smallest original index).
#[derive(Clone, Debug)]
pub struct NearestIndex {
    dim: usize,
    coords: Vec<f64>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Clone, Debug)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

const LEAF: usize = 12;

impl NearestIndex {
    pub fn new(dim: usize, points: &[Point]) -> NearestIndex {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            build(points, dim, &mut order, 0, points.len(), &mut nodes);
        }
        let coords = order
            .iter()
            .flat_map(|&i| points[i].0.iter().copied())
            .collect();
        NearestIndex {
            dim,
            coords,
            order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn coords_at(&self, sorted: usize) -> &[f64] {
        &self.coords[sorted * self.dim..(sorted + 1) * self.dim]
    }

    fn box_dist(&self, node: &Node, q: &[f64]) -> f64 {
        let mut s = 0.0;
        for ((lo, hi), v) in node.lo.iter().zip(&node.hi).zip(q) {
            let g = if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            };
            s += g * g;
        }
        s.sqrt()
    }

    /// Distance to the nearest point and that point's index in the original
    /// slice; `None` for an empty index.
    pub fn nearest(&self, q: &[f64]) -> Option<(f64, usize)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        self.nearest_in(0, q, &mut best);
        Some(best)
    }

    fn nearest_in(&self, n: usize, q: &[f64], best: &mut (f64, usize)) {
        let node = &self.nodes[n];
        match node.children {
            None => {
                for s in node.start..node.end {
                    let d = dist(self.coords_at(s), q);
                    let orig = self.order[s];
                    if d < best.0 || (d == best.0 && orig < best.1) {
                        *best = (d, orig);
                    }
                }
            }
            Some((a, b)) => {
                let da = self.box_dist(&self.nodes[a], q);
                let db = self.box_dist(&self.nodes[b], q);
                let (first, df, second, ds) = if da <= db {
                    (a, da, b, db)
                } else {
                    (b, db, a, da)
                };
                if df <= best.0 {
                    self.nearest_in(first, q, best);
                }
                if ds <= best.0 {
                    self.nearest_in(second, q, best);
                }
            }
        }
    }

    pub fn dist(&self, q: &[f64]) -> f64 {
        self.nearest(q).map_or(f64::INFINITY, |(d, _)| d)
    }

    /// All original indices within `radius` of `q`, ascending.
    pub fn within(&self, q: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() {
            self.within_in(0, q, radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn within_in(&self, n: usize, q: &[f64], radius: f64, out: &mut Vec<usize>) {
        let node = &self.nodes[n];
        if self.box_dist(node, q) > radius {
            return;
        }
        match node.children {
            None => out.extend(
                (node.start..node.end)
                    .filter(|&s| dist(self.coords_at(s), q) <= radius)
                    .map(|s| self.order[s]),
            ),
            Some((a, b)) => {
                self.within_in(a, q, radius, out);
                self.within_in(b, q, radius, out);
            }
        }
    }

    /// `max_{q in queries} d(q, indexed set)`; `0` for no queries and `+inf`
    /// when the index is empty but queries are not.
    pub fn directed_hausdorff(&self, queries: &[Point]) -> f64 {
        queries
            .par_iter()
            .map(|q| self.dist(&q.0))
            .reduce(|| 0.0, f64::max)
    }
}

fn build(
    points: &[Point],
    dim: usize,
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &i in &order[start..end] {
        for k in 0..dim {
            lo[k] = lo[k].min(points[i].0[k]);
            hi[k] = hi[k].max(points[i].0[k]);
        }
    }
    let id = nodes.len();
    nodes.push(Node {
        lo,
        hi,
        start,
        end,
        children: None,
    });
    if end - start > LEAF {
        let node = &nodes[id];
        let axis = (0..dim)
            .max_by(|&a, &b| (node.hi[a] - node.lo[a]).total_cmp(&(node.hi[b] - node.lo[b])))
            .unwrap_or(0);
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            points[i].0[axis].total_cmp(&points[j].0[axis])
        });
        let a = build(points, dim, order, start, mid, nodes);
        let b = build(points, dim, order, mid, end, nodes);
        nodes[id].children = Some((a, b));
    }
    id
}
