//! Kd-tree k-nearest-neighbor search with an exhaustive-scan reference.
//!
//! Distances are Euclidean. Equal distances are ordered by point id, which
//! makes tree queries and [`linear_scan`] agree exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnnError {
    #[error("cannot build an index over zero points")]
    Empty,
    #[error("points must have at least one coordinate")]
    ZeroDimension,
    #[error("point {id} has dimension {actual}, expected {expected}")]
    MixedDimensions {
        id: usize,
        expected: usize,
        actual: usize,
    },
    #[error("point {id} has a non-finite coordinate")]
    NonFinite { id: usize },
    #[error("query has dimension {actual}, index has {expected}")]
    QueryDimension { expected: usize, actual: usize },
    #[error("query has a non-finite coordinate")]
    NonFiniteQuery,
    #[error("k must be at least 1")]
    ZeroK,
}

/// A digit class, 0 through 9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digit(u8);

impl Digit {
    pub const ALL: [Digit; 10] = [
        Digit(0),
        Digit(1),
        Digit(2),
        Digit(3),
        Digit(4),
        Digit(5),
        Digit(6),
        Digit(7),
        Digit(8),
        Digit(9),
    ];

    pub fn new(value: u8) -> Option<Self> {
        (value <= 9).then_some(Digit(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint<T> {
    pub vector: Vec<T>,
    pub label: Digit,
    /// Insertion ordinal, used to break distance ties.
    pub id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub id: usize,
    pub label: Digit,
    pub distance: T,
}

/// Neighbors in ascending `(distance, id)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet<T>(Vec<Neighbor<T>>);

impl<T> NeighborSet<T> {
    pub fn as_slice(&self) -> &[Neighbor<T>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Neighbor<T>> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<Neighbor<T>> {
        self.0
    }
}

impl<T: Scalar> NeighborSet<T> {
    /// Sorts into canonical order. Intended for tests that assemble sets by hand.
    pub fn from_unsorted(mut neighbors: Vec<Neighbor<T>>) -> Self {
        neighbors.sort_by(|a, b| cmp_key(a.distance, a.id, b.distance, b.id));
        NeighborSet(neighbors)
    }
}

impl<'a, T> IntoIterator for &'a NeighborSet<T> {
    type Item = &'a Neighbor<T>;
    type IntoIter = std::slice::Iter<'a, Neighbor<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Work counters for a single query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QueryStats {
    pub distance_evals: usize,
    pub nodes_visited: usize,
}

#[inline]
fn cmp_key<T: Scalar>(da: T, ia: usize, db: T, ib: usize) -> Ordering {
    da.partial_cmp(&db)
        .unwrap_or(Ordering::Equal)
        .then(ia.cmp(&ib))
}

/// Squared Euclidean distance, summed in dimension order.
#[inline]
pub fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

fn validate_points<T: Scalar>(points: &[LabeledPoint<T>]) -> Result<usize, KnnError> {
    let dims = points.first().ok_or(KnnError::Empty)?.vector.len();
    if dims == 0 {
        return Err(KnnError::ZeroDimension);
    }
    for p in points {
        if p.vector.len() != dims {
            return Err(KnnError::MixedDimensions {
                id: p.id,
                expected: dims,
                actual: p.vector.len(),
            });
        }
        if p.vector.iter().any(|v| !v.is_finite()) {
            return Err(KnnError::NonFinite { id: p.id });
        }
    }
    Ok(dims)
}

fn validate_query<T: Scalar>(dims: usize, query: &[T], k: usize) -> Result<(), KnnError> {
    if k == 0 {
        return Err(KnnError::ZeroK);
    }
    if query.len() != dims {
        return Err(KnnError::QueryDimension {
            expected: dims,
            actual: query.len(),
        });
    }
    if query.iter().any(|v| !v.is_finite()) {
        return Err(KnnError::NonFiniteQuery);
    }
    Ok(())
}

/// Candidate in the bounded max-heap; the top is the current worst.
struct Candidate<T> {
    dist_sq: T,
    id: usize,
    slot: usize,
}

impl<T: Scalar> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Candidate<T> {}

impl<T: Scalar> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_key(self.dist_sq, self.id, other.dist_sq, other.id)
    }
}

struct Best<T> {
    k: usize,
    heap: BinaryHeap<Candidate<T>>,
}

impl<T: Scalar> Best<T> {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k.saturating_add(1).min(1 << 16)),
        }
    }

    fn offer(&mut self, dist_sq: T, id: usize, slot: usize) {
        let cand = Candidate { dist_sq, id, slot };
        if self.heap.len() < self.k {
            self.heap.push(cand);
        } else if let Some(mut top) = self.heap.peek_mut() {
            if cand < *top {
                *top = cand;
            }
        }
    }

    /// Whether a region at squared distance `bound` may still hold a result.
    fn admits(&self, bound: T) -> bool {
        self.heap.len() < self.k || self.heap.peek().is_some_and(|top| bound <= top.dist_sq)
    }

    fn finish(self, points: &[LabeledPoint<T>]) -> NeighborSet<T> {
        let mut found = self.heap.into_vec();
        found.sort();
        NeighborSet(
            found
                .into_iter()
                .map(|c| Neighbor {
                    id: c.id,
                    label: points[c.slot].label,
                    distance: c.dist_sq.sqrt(),
                })
                .collect(),
        )
    }
}

/// Exact kNN by scanning every point.
pub fn linear_scan<T: Scalar>(
    points: &[LabeledPoint<T>],
    query: &[T],
    k: usize,
) -> Result<NeighborSet<T>, KnnError> {
    let dims = validate_points(points)?;
    validate_query(dims, query, k)?;
    let mut best = Best::new(k);
    for (slot, p) in points.iter().enumerate() {
        best.offer(squared_distance(&p.vector, query), p.id, slot);
    }
    Ok(best.finish(points))
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    /// Index into `KdTree::points`.
    point: u32,
    axis: u32,
    left: u32,
    right: u32,
}

/// Immutable kd-tree over labeled points.
///
/// Built by recursive lower-median splits with the split axis cycling by
/// depth. Every node stores one point; the left subtree holds coordinates
/// `<=` the node's on its axis and the right subtree `>=`.
#[derive(Debug, Clone)]
pub struct KdTree<T> {
    points: Vec<LabeledPoint<T>>,
    nodes: Vec<Node>,
    root: u32,
    dims: usize,
}

impl<T: Scalar> KdTree<T> {
    pub fn build(points: Vec<LabeledPoint<T>>) -> Result<Self, KnnError> {
        let dims = validate_points(&points)?;
        if points.len() >= NONE as usize {
            // node links are u32
            panic!("kd-tree supports fewer than {NONE} points");
        }
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = build_rec(&points, dims, &mut order, 0, &mut nodes);
        Ok(KdTree {
            points,
            nodes,
            root,
            dims,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in the order they were supplied to [`build`](Self::build).
    pub fn points(&self) -> &[LabeledPoint<T>] {
        &self.points
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], n: u32) -> usize {
            if n == NONE {
                return 0;
            }
            let node = &nodes[n as usize];
            1 + rec(nodes, node.left).max(rec(nodes, node.right))
        }
        rec(&self.nodes, self.root)
    }

    /// Points visited by an in-order traversal.
    pub fn in_order(&self) -> Vec<&LabeledPoint<T>> {
        fn rec<'a, T>(tree: &'a KdTree<T>, n: u32, out: &mut Vec<&'a LabeledPoint<T>>) {
            if n == NONE {
                return;
            }
            let node = &tree.nodes[n as usize];
            rec(tree, node.left, out);
            out.push(&tree.points[node.point as usize]);
            rec(tree, node.right, out);
        }
        let mut out = Vec::with_capacity(self.len());
        rec(self, self.root, &mut out);
        out
    }

    /// Checks the split ordering of every subtree. Used by tests.
    pub fn check_invariants(&self) -> bool {
        fn collect(nodes: &[Node], n: u32, out: &mut Vec<u32>) {
            if n != NONE {
                out.push(nodes[n as usize].point);
                collect(nodes, nodes[n as usize].left, out);
                collect(nodes, nodes[n as usize].right, out);
            }
        }
        self.nodes.iter().all(|node| {
            let axis = node.axis as usize;
            let split = self.points[node.point as usize].vector[axis];
            let (mut left, mut right) = (Vec::new(), Vec::new());
            collect(&self.nodes, node.left, &mut left);
            collect(&self.nodes, node.right, &mut right);
            left.iter()
                .all(|&p| self.points[p as usize].vector[axis] <= split)
                && right
                    .iter()
                    .all(|&p| self.points[p as usize].vector[axis] >= split)
        })
    }

    pub fn knn(&self, query: &[T], k: usize) -> Result<NeighborSet<T>, KnnError> {
        self.knn_with_stats(query, k).map(|(set, _)| set)
    }

    /// Branch-and-bound search: descend toward the query, and enter the far
    /// side of a split only while the current k-th distance reaches across it.
    pub fn knn_with_stats(
        &self,
        query: &[T],
        k: usize,
    ) -> Result<(NeighborSet<T>, QueryStats), KnnError> {
        validate_query(self.dims, query, k)?;
        let mut best = Best::new(k);
        let mut stats = QueryStats::default();
        self.search(self.root, query, &mut best, &mut stats);
        Ok((best.finish(&self.points), stats))
    }

    fn search(&self, n: u32, query: &[T], best: &mut Best<T>, stats: &mut QueryStats) {
        if n == NONE {
            return;
        }
        let node = &self.nodes[n as usize];
        let p = &self.points[node.point as usize];
        stats.nodes_visited += 1;
        stats.distance_evals += 1;
        best.offer(
            squared_distance(&p.vector, query),
            p.id,
            node.point as usize,
        );

        let diff = query[node.axis as usize] - p.vector[node.axis as usize];
        let (near, far) = if diff < T::zero() {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, query, best, stats);
        if far != NONE && best.admits(diff * diff) {
            self.search(far, query, best, stats);
        }
    }
}

fn build_rec<T: Scalar>(
    points: &[LabeledPoint<T>],
    dims: usize,
    order: &mut [u32],
    depth: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    if order.is_empty() {
        return NONE;
    }
    let axis = depth % dims;
    let mid = (order.len() - 1) / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        let (pa, pb) = (&points[a as usize], &points[b as usize]);
        cmp_key(pa.vector[axis], pa.id, pb.vector[axis], pb.id)
    });
    let slot = nodes.len();
    nodes.push(Node {
        point: order[mid],
        axis: axis as u32,
        left: NONE,
        right: NONE,
    });
    let (lo, rest) = order.split_at_mut(mid);
    let hi = &mut rest[1..];
    let left = build_rec(points, dims, lo, depth + 1, nodes);
    let right = build_rec(points, dims, hi, depth + 1, nodes);
    nodes[slot].left = left;
    nodes[slot].right = right;
    slot as u32
}

/// Most frequent label; ties go to whichever tied label appears nearest.
pub fn majority_vote<T>(neighbors: &NeighborSet<T>) -> Option<Digit> {
    let mut counts = [0usize; 10];
    for n in neighbors {
        counts[n.label.index()] += 1;
    }
    let top = *counts.iter().max()?;
    neighbors
        .iter()
        .map(|n| n.label)
        .find(|l| counts[l.index()] == top)
}
