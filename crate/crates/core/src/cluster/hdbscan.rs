//! HDBSCAN* with excess-of-mass cluster selection.
//!
//! core distances -> mutual reachability -> minimum spanning tree ->
//! single-linkage hierarchy -> condensed tree -> stable clusters.

use serde::{Deserialize, Serialize};

use super::{compact_labels, ClusteringResult, NOISE};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::knn::build_knn_graph;
use crate::linalg::distance;

/// Floor applied to mutual reachability distances so that `λ = 1/d` stays
/// finite for duplicate points.
const MIN_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Merge step of the single-linkage hierarchy. Node `n + s` is created by
/// step `s`; ids below `n` are points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkageNode {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

/// Row of the condensed tree. Cluster ids start at `n` (the root); a child
/// below `n` is a single point leaving its parent cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensedEdge {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub child_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedTree {
    pub n_points: usize,
    pub edges: Vec<CondensedEdge>,
    /// Stability per cluster, indexed by `cluster_id - n_points`.
    pub stability: Vec<f64>,
    /// Selected cluster ids.
    pub selected: Vec<usize>,
}

impl CondensedTree {
    pub fn root(&self) -> usize {
        self.n_points
    }

    pub fn n_cluster_nodes(&self) -> usize {
        self.stability.len()
    }

    /// λ at which `cluster` split off its parent (0 for the root).
    pub fn birth_lambda(&self, cluster: usize) -> f64 {
        self.edges.iter().find(|e| e.child == cluster).map_or(0.0, |e| e.lambda)
    }
}

/// Dense Prim's algorithm over the complete graph on `n` vertices. Edges are
/// returned in the order they were added.
pub fn prim_mst(n: usize, weight: impl Fn(usize, usize) -> f64) -> Vec<MstEdge> {
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let w = weight(current, j);
            if w < best[j] {
                best[j] = w;
                from[j] = current;
            }
            if best[j] < next_w || next == usize::MAX {
                next_w = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push(MstEdge {
            a: from[next],
            b: next,
            weight: next_w,
        });
        current = next;
    }
    edges
}

/// Core distances (distance to the `min_samples`-th nearest point, counting
/// the point itself) and the MST of the mutual reachability graph.
pub fn mutual_reachability_mst(data: &Dataset, min_samples: usize) -> Result<(Vec<f64>, Vec<MstEdge>)> {
    let n = data.n();
    if min_samples < 2 || min_samples > n {
        return Err(Error::param(format!(
            "min_samples = {min_samples} must lie in [2, n = {n}]"
        )));
    }
    let graph = build_knn_graph(data, min_samples - 1)?;
    let core: Vec<f64> = graph.distances.iter().map(|d| d[min_samples - 2]).collect();
    let mst = prim_mst(n, |a, b| {
        distance(data.point(a), data.point(b))
            .max(core[a])
            .max(core[b])
            .max(MIN_DISTANCE)
    });
    Ok((core, mst))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage merge sequence from MST edges (sorted by weight, stable).
pub fn single_linkage(n: usize, mst: &[MstEdge]) -> Vec<LinkageNode> {
    let mut edges = mst.to_vec();
    edges.sort_by(|x, y| x.weight.total_cmp(&y.weight));
    // union-find over 2n-1 node ids; each root maps to its current node id
    let mut uf = UnionFind::new(2 * n - 1);
    let mut size = vec![1usize; 2 * n - 1];
    let mut nodes = Vec::with_capacity(n - 1);
    for (s, e) in edges.iter().enumerate() {
        let ra = uf.find(e.a);
        let rb = uf.find(e.b);
        let id = n + s;
        size[id] = size[ra] + size[rb];
        uf.parent[ra] = id;
        uf.parent[rb] = id;
        nodes.push(LinkageNode {
            left: ra,
            right: rb,
            distance: e.weight,
            size: size[id],
        });
    }
    nodes
}

/// Collapses the single-linkage hierarchy at `min_cluster_size`, computes
/// stabilities and selects clusters by excess of mass. The root is never
/// selected.
pub fn condense_tree(n: usize, linkage: &[LinkageNode], min_cluster_size: usize) -> CondensedTree {
    let node_size = |id: usize| if id < n { 1 } else { linkage[id - n].size };
    let children = |id: usize| {
        let node = &linkage[id - n];
        (node.left, node.right)
    };
    // every point below `id` in the hierarchy
    let leaves = |id: usize| {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                let (l, r) = children(x);
                stack.push(r);
                stack.push(l);
            }
        }
        out.sort_unstable();
        out
    };

    let mut edges = Vec::new();
    let mut next_cluster = n + 1;
    if n >= 2 {
        // (hierarchy node, cluster it belongs to)
        let mut stack = vec![(2 * n - 2, n)];
        while let Some((node, cluster)) = stack.pop() {
            let (left, right) = children(node);
            let lambda = 1.0 / linkage[node - n].distance;
            let (ls, rs) = (node_size(left), node_size(right));
            let shed = |sub: usize, edges: &mut Vec<CondensedEdge>| {
                for p in leaves(sub) {
                    edges.push(CondensedEdge {
                        parent: cluster,
                        child: p,
                        lambda,
                        child_size: 1,
                    });
                }
            };
            match (ls >= min_cluster_size, rs >= min_cluster_size) {
                (true, true) => {
                    let mut spawned = Vec::new();
                    for (sub, size) in [(left, ls), (right, rs)] {
                        edges.push(CondensedEdge {
                            parent: cluster,
                            child: next_cluster,
                            lambda,
                            child_size: size,
                        });
                        spawned.push((sub, next_cluster));
                        next_cluster += 1;
                    }
                    // left subtree processed first
                    stack.extend(spawned.into_iter().rev().filter(|(sub, _)| *sub >= n));
                }
                (false, false) => {
                    shed(left, &mut edges);
                    shed(right, &mut edges);
                }
                (true, false) => {
                    shed(right, &mut edges);
                    if left >= n {
                        stack.push((left, cluster));
                    }
                }
                (false, true) => {
                    shed(left, &mut edges);
                    if right >= n {
                        stack.push((right, cluster));
                    }
                }
            }
        }
    }

    let n_clusters = next_cluster - n;
    let mut birth = vec![0.0; n_clusters];
    for e in edges.iter().filter(|e| e.child >= n) {
        birth[e.child - n] = e.lambda;
    }
    let mut stability = vec![0.0; n_clusters];
    for e in &edges {
        stability[e.parent - n] += (e.lambda - birth[e.parent - n]) * e.child_size as f64;
    }

    // excess of mass, children always have larger ids than their parent
    let mut child_clusters = vec![Vec::new(); n_clusters];
    for e in edges.iter().filter(|e| e.child >= n) {
        child_clusters[e.parent - n].push(e.child - n);
    }
    let mut selected = vec![false; n_clusters];
    let mut best = stability.clone();
    for c in (1..n_clusters).rev() {
        let subtree: f64 = child_clusters[c].iter().map(|&k| best[k]).sum();
        if subtree > stability[c] {
            best[c] = subtree;
        } else {
            selected[c] = true;
            let mut stack = child_clusters[c].clone();
            while let Some(k) = stack.pop() {
                selected[k] = false;
                stack.extend(child_clusters[k].iter().copied());
            }
        }
    }

    CondensedTree {
        n_points: n,
        edges,
        stability,
        selected: (0..n_clusters).filter(|&c| selected[c]).map(|c| c + n).collect(),
    }
}

fn labels_from_tree(tree: &CondensedTree) -> Vec<i64> {
    let n = tree.n_points;
    let n_clusters = tree.n_cluster_nodes();
    let mut parent_of = vec![usize::MAX; n_clusters];
    let mut point_parent = vec![tree.root(); n];
    for e in &tree.edges {
        if e.child >= n {
            parent_of[e.child - n] = e.parent;
        } else {
            point_parent[e.child] = e.parent;
        }
    }
    let mut selected = vec![false; n_clusters];
    for &c in &tree.selected {
        selected[c - n] = true;
    }
    let raw: Vec<i64> = point_parent
        .iter()
        .map(|&start| {
            let mut c = start;
            loop {
                if selected[c - n] {
                    return c as i64;
                }
                if c == tree.root() {
                    return NOISE;
                }
                c = parent_of[c - n];
            }
        })
        .collect();
    compact_labels(&raw).0
}

/// HDBSCAN* labels together with its condensed tree.
pub fn hdbscan_with_tree(data: &Dataset, min_cluster_size: usize) -> Result<(ClusteringResult, CondensedTree)> {
    if min_cluster_size < 2 {
        return Err(Error::param(format!(
            "min_cluster_size = {min_cluster_size} must be at least 2"
        )));
    }
    let n = data.n();
    if n < 2 * min_cluster_size {
        return Err(Error::DatasetTooSmall {
            n,
            required: 2 * min_cluster_size,
        });
    }
    let (_, mst) = mutual_reachability_mst(data, min_cluster_size)?;
    let linkage = single_linkage(n, &mst);
    let tree = condense_tree(n, &linkage, min_cluster_size);
    let labels = labels_from_tree(&tree);
    let n_clusters = labels
        .iter()
        .filter(|&&l| l >= 0)
        .map(|&l| l as usize + 1)
        .max()
        .unwrap_or(0);
    Ok((
        ClusteringResult {
            labels,
            centroids: None,
            n_clusters,
            iterations: 0,
            inertia: None,
            converged: true,
            min_cluster_size: Some(min_cluster_size),
        },
        tree,
    ))
}

/// HDBSCAN* with `min_samples = min_cluster_size`. Label `-1` is noise.
pub fn hdbscan(data: &Dataset, min_cluster_size: usize) -> Result<ClusteringResult> {
    hdbscan_with_tree(data, min_cluster_size).map(|(r, _)| r)
}
