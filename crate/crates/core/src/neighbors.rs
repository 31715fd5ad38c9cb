//! Exact Euclidean k-nearest-neighbor search.
//!
//! Results are totally ordered by `(distance, id)`, so answers are
//! reproducible and identical to an exhaustive scan. Low-dimensional sets
//! are searched with a k-d tree; above [`KD_TREE_MAX_DIM`] dimensions the
//! index scans all points.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Above this dimension the index answers queries by exhaustive scan.
pub const KD_TREE_MAX_DIM: usize = 16;

const LEAF_SIZE: usize = 12;

/// One query answer: the id (insertion position) of a point and its
/// distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

impl Neighbor {
    fn cmp_key(&self, other: &Neighbor) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.id.cmp(&other.id))
    }
}

// Max-heap entry: the worst current candidate sits on top.
struct Candidate(Neighbor);

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_key(&other.0)
    }
}

/// Euclidean distance, summed in coordinate order.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// Immutable exact kNN index over a point set with ids `0..n`.
pub struct NeighborIndex {
    dim: usize,
    data: Vec<f64>,
    // k-d tree leaves refer to ranges of `order`
    order: Vec<usize>,
    root: Option<Node>,
}

impl std::fmt::Debug for NeighborIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NeighborIndex")
            .field("dim", &self.dim)
            .field("len", &self.len())
            .field("kd_tree", &self.root.is_some())
            .finish()
    }
}

impl NeighborIndex {
    pub fn build<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::Size("cannot index an empty point set".into()))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Self::from_flat(dim, data)
    }

    /// Build from a row-major buffer of `data.len() / dim` points.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Spec("points must have at least one coordinate".into()));
        }
        if data.is_empty() {
            return Err(Error::Size("cannot index an empty point set".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: data.len() % dim,
            });
        }
        let n = data.len() / dim;
        let mut index = NeighborIndex {
            dim,
            data,
            order: (0..n).collect(),
            root: None,
        };
        if dim <= KD_TREE_MAX_DIM && n > LEAF_SIZE {
            let mut order = std::mem::take(&mut index.order);
            index.root = Some(index.build_node(&mut order, 0));
            index.order = order;
        }
        Ok(index)
    }

    fn build_node(&self, order: &mut [usize], offset: usize) -> Node {
        if order.len() <= LEAF_SIZE {
            return Node::Leaf {
                start: offset,
                end: offset + order.len(),
            };
        }
        // axis of widest spread
        let mut axis = 0;
        let mut best = f64::NEG_INFINITY;
        for a in 0..self.dim {
            let (lo, hi) = order.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.coord(i, a);
                (lo.min(v), hi.max(v))
            });
            if hi - lo > best {
                best = hi - lo;
                axis = a;
            }
        }
        if best <= 0.0 {
            // all points identical
            return Node::Leaf {
                start: offset,
                end: offset + order.len(),
            };
        }
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            self.coord(a, axis).total_cmp(&self.coord(b, axis))
        });
        let value = self.coord(order[mid], axis);
        let (left, right) = order.split_at_mut(mid);
        Node::Split {
            axis,
            value,
            left: Box::new(self.build_node(left, offset)),
            right: Box::new(self.build_node(right, offset + mid)),
        }
    }

    #[inline]
    fn coord(&self, id: usize, axis: usize) -> f64 {
        self.data[id * self.dim + axis]
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn uses_kd_tree(&self) -> bool {
        self.root.is_some()
    }

    /// The `k` points closest to `y`, never returning `exclude`. Returns
    /// every available point when fewer than `k` exist.
    pub fn knn(&self, y: &[f64], k: usize, exclude: Option<usize>) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(Error::Spec("k must be at least 1".into()));
        }
        if y.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: y.len(),
            });
        }
        let available = self.len() - usize::from(exclude.is_some_and(|e| e < self.len()));
        if available == 0 {
            return Err(Error::Query("no points left after exclusion".into()));
        }
        let k = k.min(available);
        let mut heap = BinaryHeap::with_capacity(k + 1);
        match &self.root {
            Some(root) => self.search(root, y, k, exclude, &mut heap),
            None => {
                for id in 0..self.len() {
                    self.offer(id, y, k, exclude, &mut heap);
                }
            }
        }
        let mut out: Vec<Neighbor> = heap.into_iter().map(|c| c.0).collect();
        out.sort_by(Neighbor::cmp_key);
        Ok(out)
    }

    #[inline]
    fn offer(
        &self,
        id: usize,
        y: &[f64],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if Some(id) == exclude {
            return;
        }
        let candidate = Neighbor {
            id,
            distance: euclidean(y, self.point(id)),
        };
        if heap.len() < k {
            heap.push(Candidate(candidate));
        } else if let Some(worst) = heap.peek() {
            if candidate.cmp_key(&worst.0) == Ordering::Less {
                heap.pop();
                heap.push(Candidate(candidate));
            }
        }
    }

    fn search(
        &self,
        node: &Node,
        y: &[f64],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match node {
            Node::Leaf { start, end } => {
                for &id in &self.order[*start..*end] {
                    self.offer(id, y, k, exclude, heap);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = y[*axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, y, k, exclude, heap);
                // Ties must still be visited so the id tie-break stays
                // exact; the slack absorbs rounding in the distance sum.
                let visit = heap.len() < k
                    || heap
                        .peek()
                        .is_some_and(|w| diff.abs() <= w.0.distance * (1.0 + 1e-12) + 1e-300);
                if visit {
                    self.search(far, y, k, exclude, heap);
                }
            }
        }
    }

    /// Distance to the `k`-th nearest point other than `exclude`.
    pub fn k_dist(&self, y: &[f64], k: usize, exclude: Option<usize>) -> Result<f64> {
        let nn = self.knn(y, k, exclude)?;
        if nn.len() < k {
            return Err(Error::Size(format!(
                "k = {k} but only {} other points are indexed",
                nn.len()
            )));
        }
        Ok(nn[k - 1].distance)
    }

    /// `k_dist` of an indexed point, excluding the point itself.
    pub fn k_dist_of(&self, id: usize, k: usize) -> Result<f64> {
        self.k_dist(self.point(id), k, Some(id))
    }
}
