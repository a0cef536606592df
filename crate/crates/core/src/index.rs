//! Exact nearest-representative lookups.
//!
//! [`CellHash`] answers "nearest point within ε" during greedy graph
//! construction. It buckets points by the first few coordinates on a grid
//! whose cells are slightly wider than ε, so every point within ε of a query
//! lies in one of the 3^k neighbouring cells of the projected query.
//!
//! [`KdTree`] answers unrestricted nearest-point queries over a fixed point
//! set. Both break distance ties by the lowest point id.

use std::collections::HashMap;

/// Euclidean distance, summed in dimension order.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `(dist, id)` ordering used for every nearest-point decision.
#[inline]
fn better(dist: f64, id: usize, best: Option<(f64, usize)>) -> bool {
    match best {
        None => true,
        Some((bd, bid)) => dist < bd || (dist == bd && id < bid),
    }
}

const MAX_HASHED_DIMS: usize = 3;

pub struct CellHash {
    radius: f64,
    cell: f64,
    hashed_dims: usize,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl CellHash {
    pub fn new(radius: f64, dim: usize) -> Self {
        CellHash {
            radius,
            cell: radius * (1.0 + 1e-9),
            hashed_dims: dim.min(MAX_HASHED_DIMS),
            cells: HashMap::new(),
        }
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p[..self.hashed_dims]
            .iter()
            .map(|v| (v / self.cell).floor() as i64)
            .collect()
    }

    pub fn insert(&mut self, id: usize, p: &[f64]) {
        let key = self.key(p);
        self.cells.entry(key).or_default().push(id);
    }

    /// Nearest point with distance `<= radius`, looking points up in
    /// `points` by id.
    pub fn nearest_within(&self, q: &[f64], points: &[Vec<f64>]) -> Option<(usize, f64)> {
        let center = self.key(q);
        let mut best: Option<(f64, usize)> = None;
        let mut key = center.clone();
        let neighbours = 3usize.pow(self.hashed_dims as u32);
        for code in 0..neighbours {
            let mut c = code;
            for (k, base) in key.iter_mut().zip(&center) {
                *k = base + (c % 3) as i64 - 1;
                c /= 3;
            }
            let Some(ids) = self.cells.get(&key) else {
                continue;
            };
            for &id in ids {
                let d = euclidean(q, &points[id]);
                if d <= self.radius && better(d, id, best) {
                    best = Some((d, id));
                }
            }
        }
        best.map(|(d, id)| (id, d))
    }
}

enum KdNode {
    Leaf(Vec<usize>),
    Split {
        axis: usize,
        value: f64,
        left: Box<KdNode>,
        right: Box<KdNode>,
    },
}

const LEAF_SIZE: usize = 8;

/// Static kd-tree over a set of points, indexed by position.
pub struct KdTree {
    root: Option<KdNode>,
    dim: usize,
}

impl KdTree {
    pub fn build(points: &[Vec<f64>]) -> Self {
        let dim = points.first().map_or(0, Vec::len);
        if points.is_empty() {
            return KdTree { root: None, dim };
        }
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let root = Self::build_node(points, &mut ids, dim, 0);
        KdTree {
            root: Some(root),
            dim,
        }
    }

    fn build_node(points: &[Vec<f64>], ids: &mut [usize], dim: usize, depth: usize) -> KdNode {
        if ids.len() <= LEAF_SIZE || dim == 0 {
            return KdNode::Leaf(ids.to_vec());
        }
        // split on the widest axis
        let axis = (0..dim)
            .max_by(|&a, &b| {
                let spread = |ax: usize| {
                    let (lo, hi) = ids.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &i| {
                        (acc.0.min(points[i][ax]), acc.1.max(points[i][ax]))
                    });
                    hi - lo
                };
                spread(a).total_cmp(&spread(b)).then(b.cmp(&a))
            })
            .unwrap_or(depth % dim);
        ids.sort_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
        let mid = ids.len() / 2;
        let value = points[ids[mid]][axis];
        if points[ids[0]][axis] == points[ids[ids.len() - 1]][axis] {
            return KdNode::Leaf(ids.to_vec());
        }
        let (left, right) = ids.split_at_mut(mid);
        KdNode::Split {
            axis,
            value,
            left: Box::new(Self::build_node(points, left, dim, depth + 1)),
            right: Box::new(Self::build_node(points, right, dim, depth + 1)),
        }
    }

    /// Exact nearest point; `points` must be the set the tree was built on.
    pub fn nearest(&self, q: &[f64], points: &[Vec<f64>]) -> Option<(usize, f64)> {
        debug_assert_eq!(q.len(), self.dim);
        let root = self.root.as_ref()?;
        let mut best = None;
        Self::search(root, q, points, &mut best);
        best.map(|(d, id)| (id, d))
    }

    fn search(node: &KdNode, q: &[f64], points: &[Vec<f64>], best: &mut Option<(f64, usize)>) {
        match node {
            KdNode::Leaf(ids) => {
                for &id in ids {
                    let d = euclidean(q, &points[id]);
                    if better(d, id, *best) {
                        *best = Some((d, id));
                    }
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[*axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                Self::search(near, q, points, best);
                // slack keeps rounding in the plane distance from pruning ties
                let plane = diff.abs();
                let visit = match *best {
                    None => true,
                    Some((bd, _)) => plane <= bd * (1.0 + 1e-12) + 1e-300,
                };
                if visit {
                    Self::search(far, q, points, best);
                }
            }
        }
    }
}
