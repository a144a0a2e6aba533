//! Internal clustering validity indices: silhouette, Calinski-Harabasz and
//! Davies-Bouldin.
//!
//! Labels are signed; `-1` marks noise and those points are dropped before
//! any index is computed. Remaining labels need not be contiguous.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{distance, squared_distance};

/// Value reported for Calinski-Harabasz when the within-cluster scatter is
/// exactly zero.
pub const CH_SENTINEL: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexScores {
    pub silhouette: f64,
    pub calinski_harabasz: f64,
    pub davies_bouldin: f64,
    pub evaluated_points: usize,
    pub noise_points: usize,
    pub n_clusters: usize,
    /// `calinski_harabasz` holds [`CH_SENTINEL`] instead of infinity.
    pub ch_capped: bool,
}

/// Non-noise points with labels remapped to `0..c` in first-occurrence order.
struct Evaluated {
    rows: Vec<usize>,
    labels: Vec<usize>,
    n_clusters: usize,
}

fn evaluated(data: &Dataset, labels: &[i64]) -> Result<Evaluated> {
    if labels.len() != data.n() {
        return Err(Error::Dimension {
            expected: (data.n(), 1),
            got: (labels.len(), 1),
        });
    }
    let mut ids: Vec<i64> = Vec::new();
    let mut rows = Vec::new();
    let mut mapped = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if l < 0 {
            continue;
        }
        let id = match ids.iter().position(|&x| x == l) {
            Some(p) => p,
            None => {
                ids.push(l);
                ids.len() - 1
            }
        };
        rows.push(i);
        mapped.push(id);
    }
    if ids.len() < 2 {
        return Err(Error::UndefinedIndex(format!(
            "{} cluster(s) after noise removal, need at least 2",
            ids.len()
        )));
    }
    Ok(Evaluated {
        rows,
        labels: mapped,
        n_clusters: ids.len(),
    })
}

fn centroids(data: &Dataset, ev: &Evaluated) -> (Vec<Vec<f64>>, Vec<usize>) {
    let m = data.m();
    let mut sums = vec![vec![0.0; m]; ev.n_clusters];
    let mut counts = vec![0usize; ev.n_clusters];
    for (&i, &c) in ev.rows.iter().zip(&ev.labels) {
        counts[c] += 1;
        for (s, &v) in sums[c].iter_mut().zip(data.point(i)) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        for v in s.iter_mut() {
            *v /= n as f64;
        }
    }
    (sums, counts)
}

/// Mean silhouette width over non-noise points.
///
/// Points in singleton clusters score 0. A point with zero intra-cluster
/// distance and positive separation scores 1.
pub fn silhouette(data: &Dataset, labels: &[i64]) -> Result<f64> {
    let ev = evaluated(data, labels)?;
    let c = ev.n_clusters;
    let mut sizes = vec![0usize; c];
    for &l in &ev.labels {
        sizes[l] += 1;
    }
    let total: f64 = (0..ev.rows.len())
        .into_par_iter()
        .map(|a| {
            let own = ev.labels[a];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; c];
            let pa = data.point(ev.rows[a]);
            for (b, (&row, &lb)) in ev.rows.iter().zip(&ev.labels).enumerate() {
                if a != b {
                    sums[lb] += distance(pa, data.point(row));
                }
            }
            let intra = sums[own] / (sizes[own] - 1) as f64;
            let nearest = (0..c)
                .filter(|&j| j != own)
                .map(|j| sums[j] / sizes[j] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = intra.max(nearest);
            if denom == 0.0 {
                0.0
            } else {
                (nearest - intra) / denom
            }
        })
        .sum();
    Ok(total / ev.rows.len() as f64)
}

/// Between/within dispersion ratio. Returns the value and whether it was
/// capped at [`CH_SENTINEL`].
pub fn calinski_harabasz(data: &Dataset, labels: &[i64]) -> Result<(f64, bool)> {
    let ev = evaluated(data, labels)?;
    let (cents, counts) = centroids(data, &ev);
    let m = data.m();
    let n = ev.rows.len();
    let mut mean = vec![0.0; m];
    for &i in &ev.rows {
        for (s, &v) in mean.iter_mut().zip(data.point(i)) {
            *s += v;
        }
    }
    for v in mean.iter_mut() {
        *v /= n as f64;
    }
    let between: f64 = cents
        .iter()
        .zip(&counts)
        .map(|(cj, &nj)| nj as f64 * squared_distance(cj, &mean))
        .sum();
    let within: f64 = ev
        .rows
        .iter()
        .zip(&ev.labels)
        .map(|(&i, &l)| squared_distance(data.point(i), &cents[l]))
        .sum();
    let c = ev.n_clusters;
    if within == 0.0 || n == c {
        return Ok((CH_SENTINEL, true));
    }
    let value = (between / (c - 1) as f64) / (within / (n - c) as f64);
    Ok((value.min(CH_SENTINEL), value >= CH_SENTINEL))
}

/// Mean over clusters of the worst `(s_i + s_j) / d_ij` ratio.
pub fn davies_bouldin(data: &Dataset, labels: &[i64]) -> Result<f64> {
    let ev = evaluated(data, labels)?;
    let (cents, counts) = centroids(data, &ev);
    let c = ev.n_clusters;
    let mut spread = vec![0.0; c];
    for (&i, &l) in ev.rows.iter().zip(&ev.labels) {
        spread[l] += distance(data.point(i), &cents[l]);
    }
    for (s, &n) in spread.iter_mut().zip(&counts) {
        *s /= n as f64;
    }
    let mut total = 0.0;
    for i in 0..c {
        let mut worst: f64 = 0.0;
        for j in 0..c {
            if i == j {
                continue;
            }
            let d = distance(&cents[i], &cents[j]);
            if d == 0.0 {
                return Err(Error::UndefinedIndex(format!(
                    "clusters {i} and {j} have coincident centroids"
                )));
            }
            worst = worst.max((spread[i] + spread[j]) / d);
        }
        total += worst;
    }
    Ok(total / c as f64)
}

/// All three indices plus noise bookkeeping.
pub fn evaluate(data: &Dataset, labels: &[i64]) -> Result<IndexScores> {
    let ev = evaluated(data, labels)?;
    let (calinski_harabasz, ch_capped) = calinski_harabasz(data, labels)?;
    Ok(IndexScores {
        silhouette: silhouette(data, labels)?,
        calinski_harabasz,
        davies_bouldin: davies_bouldin(data, labels)?,
        evaluated_points: ev.rows.len(),
        noise_points: data.n() - ev.rows.len(),
        n_clusters: ev.n_clusters,
        ch_capped,
    })
}
