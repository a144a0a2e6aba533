//! k-means, HDBSCAN* and the filtered clustering strategies built on them.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

mod hdbscan;
mod kmeans;
mod pipelines;

pub use hdbscan::{
    condense_tree, hdbscan, hdbscan_with_tree, mutual_reachability_mst, prim_mst, single_linkage, CondensedEdge,
    CondensedTree, LinkageNode, MstEdge,
};
pub use kmeans::{kmeans, kmeans_pp, kmeans_pp_init, KMEANS_MAX_ITER, KMEANS_TOL};
pub use pipelines::{
    cluster_means, hdbscan_best_mcs, hdbscan_s_centroids, hybrid_1nn, propagate_labels_1nn, s_centroid_init,
    DEFAULT_MCS_CANDIDATES,
};

/// Label assigned to noise points.
pub const NOISE: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    /// One label per point; `-1` is noise, others are `0..n_clusters`.
    pub labels: Vec<i64>,
    pub centroids: Option<DenseMatrix>,
    pub n_clusters: usize,
    pub iterations: usize,
    pub inertia: Option<f64>,
    pub converged: bool,
    /// Minimum cluster size used, for HDBSCAN-based results.
    pub min_cluster_size: Option<usize>,
}

impl ClusteringResult {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "label"])?;
        for (i, l) in self.labels.iter().enumerate() {
            w.write_record([i.to_string(), l.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Relabels non-negative ids to `0..c` by first occurrence; noise is kept.
pub(crate) fn compact_labels(labels: &[i64]) -> (Vec<i64>, usize) {
    let mut seen: Vec<i64> = Vec::new();
    let out = labels
        .iter()
        .map(|&l| {
            if l < 0 {
                return NOISE;
            }
            match seen.iter().position(|&s| s == l) {
                Some(p) => p as i64,
                None => {
                    seen.push(l);
                    (seen.len() - 1) as i64
                }
            }
        })
        .collect();
    (out, seen.len())
}
