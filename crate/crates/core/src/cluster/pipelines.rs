//! Clustering strategies that use the smooth/boundary split.

use rayon::prelude::*;

use super::{compact_labels, hdbscan, kmeans, kmeans_pp, ClusteringResult, KMEANS_MAX_ITER, KMEANS_TOL, NOISE};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::filter::Partition;
use crate::knn::nearest_in_set;
use crate::linalg::DenseMatrix;
use crate::metrics::silhouette;

pub const DEFAULT_MCS_CANDIDATES: [usize; 3] = [5, 10, 20];

/// k-means++ on `S`, then Lloyd on the full data seeded with the converged
/// `S` centroids.
pub fn s_centroid_init(full: &Dataset, partition: &Partition, c: usize, seed: u64) -> Result<ClusteringResult> {
    check_partition(full, partition)?;
    if partition.smooth_indices.len() < c {
        return Err(Error::InsufficientSmoothPoints {
            available: partition.smooth_indices.len(),
            required: c,
        });
    }
    let smooth = partition.smooth(full);
    let on_s = kmeans_pp(&smooth, c, seed)?;
    let init = on_s.centroids.expect("k-means always reports centroids");
    kmeans(full, &init, KMEANS_MAX_ITER, KMEANS_TOL)
}

/// Runs HDBSCAN* for every candidate minimum cluster size and keeps the
/// result with the highest silhouette (noise excluded). Candidates that are
/// too large for the data, or that yield fewer than two clusters, are
/// skipped. Ties go to the smaller size.
pub fn hdbscan_best_mcs(data: &Dataset, candidates: &[usize]) -> Result<(ClusteringResult, usize)> {
    let mut sizes = candidates.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let scored: Vec<Option<(ClusteringResult, f64)>> = sizes
        .par_iter()
        .map(|&mcs| {
            let r = hdbscan(data, mcs).ok()?;
            if r.n_clusters < 2 {
                return None;
            }
            let sc = silhouette(data, &r.labels).ok()?;
            Some((r, sc))
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (pos, s) in scored.iter().enumerate() {
        if let Some((_, sc)) = s {
            if best.is_none_or(|(_, b)| *sc > b) {
                best = Some((pos, *sc));
            }
        }
    }
    let (pos, best_sc) = best.ok_or_else(|| {
        Error::NoValidClustering(format!("no candidate in {candidates:?} produced at least two clusters"))
    })?;
    debug_assert!(scored.iter().flatten().all(|(_, sc)| *sc <= best_sc));
    let (result, _) = scored.into_iter().nth(pos).flatten().expect("picked a valid candidate");
    Ok((result, sizes[pos]))
}

/// Mean of each non-noise cluster, rows ordered by label.
pub fn cluster_means(data: &Dataset, labels: &[i64]) -> Result<DenseMatrix> {
    if labels.len() != data.n() {
        return Err(Error::Dimension {
            expected: (data.n(), 1),
            got: (labels.len(), 1),
        });
    }
    let c = labels
        .iter()
        .filter(|&&l| l >= 0)
        .map(|&l| l as usize + 1)
        .max()
        .unwrap_or(0);
    let mut sums = DenseMatrix::zeros(c, data.m());
    let mut counts = vec![0usize; c];
    for (i, &l) in labels.iter().enumerate() {
        if l < 0 {
            continue;
        }
        counts[l as usize] += 1;
        for (s, &v) in sums.row_mut(l as usize).iter_mut().zip(data.point(i)) {
            *s += v;
        }
    }
    for (j, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(Error::param(format!("cluster {j} has no members")));
        }
        for s in sums.row_mut(j) {
            *s /= n as f64;
        }
    }
    Ok(sums)
}

/// HDBSCAN* on `S` (size chosen from `candidates`), then Lloyd on the full
/// data started from the means of the clusters found. Returns the result and
/// the chosen minimum cluster size.
pub fn hdbscan_s_centroids(
    full: &Dataset,
    partition: &Partition,
    candidates: &[usize],
) -> Result<(ClusteringResult, usize)> {
    check_partition(full, partition)?;
    let smooth = partition.smooth(full);
    let (on_s, mcs) = hdbscan_best_mcs(&smooth, candidates)?;
    let init = cluster_means(&smooth, &on_s.labels)?;
    let mut result = kmeans(full, &init, KMEANS_MAX_ITER, KMEANS_TOL)?;
    result.min_cluster_size = Some(mcs);
    Ok((result, mcs))
}

/// Labels each boundary point with the label of its nearest non-noise smooth
/// point. Ties go to the smooth point that comes first.
pub fn propagate_labels_1nn(smooth: &Dataset, smooth_labels: &[i64], boundary: &Dataset) -> Result<Vec<i64>> {
    if smooth_labels.len() != smooth.n() {
        return Err(Error::Dimension {
            expected: (smooth.n(), 1),
            got: (smooth_labels.len(), 1),
        });
    }
    if boundary.n() > 0 && boundary.m() != smooth.m() {
        return Err(Error::Dimension {
            expected: (boundary.n(), smooth.m()),
            got: (boundary.n(), boundary.m()),
        });
    }
    let keep: Vec<usize> = (0..smooth.n()).filter(|&i| smooth_labels[i] != NOISE).collect();
    if keep.is_empty() {
        return Err(Error::PropagationImpossible);
    }
    let reference = smooth.subset(&keep);
    (0..boundary.n())
        .into_par_iter()
        .map(|b| nearest_in_set(boundary.point(b), &reference).map(|r| smooth_labels[keep[r]]))
        .collect()
}

/// HDBSCAN* on `S`, then 1-NN propagation of its labels to `B`. Labels are
/// returned in original row order; noise points inside `S` stay noise.
pub fn hybrid_1nn(full: &Dataset, partition: &Partition, candidates: &[usize]) -> Result<(ClusteringResult, usize)> {
    check_partition(full, partition)?;
    let smooth = partition.smooth(full);
    let boundary = partition.boundary(full);
    let (on_s, mcs) = hdbscan_best_mcs(&smooth, candidates)?;
    let propagated = propagate_labels_1nn(&smooth, &on_s.labels, &boundary)?;
    let mut labels = vec![NOISE; full.n()];
    for (&i, &l) in partition.smooth_indices.iter().zip(&on_s.labels) {
        labels[i] = l;
    }
    for (&i, &l) in partition.boundary_indices.iter().zip(&propagated) {
        labels[i] = l;
    }
    let (labels, n_clusters) = compact_labels(&labels);
    Ok((
        ClusteringResult {
            labels,
            centroids: None,
            n_clusters,
            iterations: 0,
            inertia: None,
            converged: true,
            min_cluster_size: Some(mcs),
        },
        mcs,
    ))
}

fn check_partition(full: &Dataset, partition: &Partition) -> Result<()> {
    if partition.n() != full.n() {
        return Err(Error::param(format!(
            "partition covers {} points but dataset has {}",
            partition.n(),
            full.n()
        )));
    }
    Ok(())
}
