//! Exact Euclidean k-nearest-neighbor search.
//!
//! Low-dimensional data (m <= 15) goes through a median-split k-d tree with
//! exact backtracking; higher dimensions use a brute-force scan, where tree
//! pruning stops paying off. Both paths order candidates by
//! `(squared distance, index)`, so distance ties always resolve to the lower
//! index and the two paths return identical graphs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{squared_distance, DenseMatrix};

/// Above this dimensionality the tree is skipped.
pub const TREE_MAX_DIM: usize = 15;
const LEAF_SIZE: usize = 16;

/// Directed k-NN lists: `neighbors[i]` never contains `i` and is sorted by
/// ascending distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborGraph {
    pub k: usize,
    pub neighbors: Vec<Vec<usize>>,
    pub distances: Vec<Vec<f64>>,
}

impl NeighborGraph {
    pub fn n(&self) -> usize {
        self.neighbors.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    idx: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then_with(|| self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded max-heap keeping the `k` smallest candidates.
struct TopK {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn full(&self) -> bool {
        self.heap.len() == self.k
    }

    fn worst(&self) -> f64 {
        self.heap.peek().map_or(f64::INFINITY, |c| c.d2)
    }

    fn offer(&mut self, c: Candidate) {
        if !self.full() {
            self.heap.push(c);
        } else if let Some(top) = self.heap.peek() {
            if c < *top {
                self.heap.pop();
                self.heap.push(c);
            }
        }
    }

    fn into_sorted(self) -> Vec<Candidate> {
        self.heap.into_sorted_vec()
    }
}

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static median-split k-d tree over the rows of a matrix.
struct KdTree<'a> {
    points: &'a DenseMatrix,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    fn build(points: &'a DenseMatrix) -> Self {
        let mut tree = KdTree {
            points,
            order: (0..points.rows()).collect(),
            nodes: Vec::new(),
        };
        if points.rows() > 0 {
            tree.build_node(0, points.rows());
        }
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // split on the axis of widest spread
        let m = self.points.cols();
        let mut dim = 0;
        let mut best_spread = -1.0;
        for d in 0..m {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let v = self.points[(i, d)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                dim = d;
            }
        }
        if best_spread <= 0.0 {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let pts = self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| pts[(a, dim)].total_cmp(&pts[(b, dim)]));
        let value = pts[(self.order[mid], dim)];
        self.nodes.push(Node::Leaf { start, end }); // placeholder
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    fn search(&self, query: &[f64], exclude: Option<usize>, top: &mut TopK) {
        if !self.nodes.is_empty() {
            self.search_node(0, query, exclude, top);
        }
    }

    fn search_node(&self, node: usize, query: &[f64], exclude: Option<usize>, top: &mut TopK) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    top.offer(Candidate {
                        d2: squared_distance(query, self.points.row(i)),
                        idx: i,
                    });
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = query[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search_node(near, query, exclude, top);
                // strict: an equal-distance point with a lower index may still win
                if !top.full() || diff * diff <= top.worst() {
                    self.search_node(far, query, exclude, top);
                }
            }
        }
    }
}

fn brute_force(points: &DenseMatrix, query: &[f64], exclude: Option<usize>, k: usize) -> Vec<Candidate> {
    let mut top = TopK::new(k);
    for i in 0..points.rows() {
        if Some(i) == exclude {
            continue;
        }
        top.offer(Candidate {
            d2: squared_distance(query, points.row(i)),
            idx: i,
        });
    }
    top.into_sorted()
}

/// Exact k nearest neighbors of every point (itself excluded).
pub fn build_knn_graph(data: &Dataset, k: usize) -> Result<NeighborGraph> {
    let n = data.n();
    if k == 0 || k >= n {
        return Err(Error::param(format!(
            "k = {k} out of range 1..={} for n = {n}",
            n.saturating_sub(1)
        )));
    }
    let points = data.features();
    let lists: Vec<Vec<Candidate>> = if data.m() <= TREE_MAX_DIM {
        let tree = KdTree::build(points);
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut top = TopK::new(k);
                tree.search(points.row(i), Some(i), &mut top);
                top.into_sorted()
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| brute_force(points, points.row(i), Some(i), k))
            .collect()
    };

    let (neighbors, distances) = lists
        .into_iter()
        .map(|l| {
            l.into_iter()
                .map(|c| (c.idx, c.d2.sqrt()))
                .unzip::<_, _, Vec<_>, Vec<_>>()
        })
        .unzip();
    Ok(NeighborGraph {
        k,
        neighbors,
        distances,
    })
}

/// Default neighborhood size `max(2, floor(log2 n))`.
pub fn default_k(n: usize) -> Result<usize> {
    if n < 4 {
        return Err(Error::DatasetTooSmall { n, required: 4 });
    }
    Ok((n.ilog2() as usize).max(2))
}

/// Index of the reference row closest to `query` (lowest index on ties).
pub fn nearest_in_set(query: &[f64], reference: &Dataset) -> Result<usize> {
    if reference.n() == 0 {
        return Err(Error::param("reference set is empty"));
    }
    if query.len() != reference.m() {
        return Err(Error::Dimension {
            expected: (1, reference.m()),
            got: (1, query.len()),
        });
    }
    let best = brute_force(reference.features(), query, None, 1);
    Ok(best[0].idx)
}
