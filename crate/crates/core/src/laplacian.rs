//! Graph-Laplacian curvature proxy.
//!
//! A Gaussian kernel restricted to k-NN pairs gives a weight matrix `W`;
//! applying the random-walk Laplacian `L_rw = I - D⁻¹W` to the coordinate
//! matrix `Z` yields, row by row, a vector whose length grows with the local
//! bending of the sample. The norm of that row is the score. No `1/σ²`
//! prefactor is applied, so scores are meant for ranking, not as absolute
//! curvature values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::knn::build_knn_graph;
use crate::linalg::DenseMatrix;

/// Kernel bandwidth choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// Median of the retained (symmetrized k-NN) edge lengths.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraphMatrices {
    pub weights: DenseMatrix,
    pub degrees: Vec<f64>,
    pub sigma: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Gaussian weights `exp(-d²/2σ²)` on the k-NN graph symmetrized by max.
pub fn gaussian_knn_weights(data: &Dataset, k: usize, sigma: Bandwidth) -> Result<WeightedGraphMatrices> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if let Bandwidth::Fixed(s) = sigma {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::param(format!("bandwidth {s} must be positive and finite")));
        }
    }
    let graph = build_knn_graph(data, k)?;
    let n = data.n();

    // distance per retained undirected edge, -1 where absent
    let mut dist = vec![-1.0; n * n];
    for i in 0..n {
        for (&j, &d) in graph.neighbors[i].iter().zip(&graph.distances[i]) {
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    let sigma = match sigma {
        Bandwidth::Fixed(s) => s,
        Bandwidth::Auto => {
            let mut edges: Vec<f64> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| dist[i * n + j])
                .filter(|&d| d >= 0.0)
                .collect();
            median(&mut edges)
        }
    };

    let mut weights = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = dist[i * n + j];
            if d < 0.0 {
                continue;
            }
            weights[(i, j)] = if d == 0.0 {
                1.0
            } else if sigma == 0.0 {
                0.0
            } else {
                (-d * d / (2.0 * sigma * sigma)).exp()
            };
        }
    }
    let degrees: Vec<f64> = weights.row_iter().map(|r| r.iter().sum()).collect();
    if let Some(index) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedVertex { index });
    }
    Ok(WeightedGraphMatrices {
        weights,
        degrees,
        sigma,
    })
}

/// `L_rw = I - D⁻¹W`.
pub fn random_walk_laplacian(g: &WeightedGraphMatrices) -> Result<DenseMatrix> {
    let n = g.weights.rows();
    if g.degrees.len() != n {
        return Err(Error::Dimension {
            expected: (n, 1),
            got: (g.degrees.len(), 1),
        });
    }
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let d = g.degrees[i];
        if d <= 0.0 {
            return Err(Error::IsolatedVertex { index: i });
        }
        for j in 0..n {
            l[(i, j)] = -g.weights[(i, j)] / d;
        }
        l[(i, i)] += 1.0;
    }
    Ok(l)
}

/// Row norms of `L_rw Z`.
pub fn laplacian_curvature_scores(data: &Dataset, k: usize, sigma: Bandwidth) -> Result<Vec<f64>> {
    let g = gaussian_knn_weights(data, k, sigma)?;
    let l = random_walk_laplacian(&g)?;
    Ok(scores_from_laplacian(&l, data))
}

/// Row norms of `L Z` for an already assembled Laplacian.
pub fn scores_from_laplacian(l: &DenseMatrix, data: &Dataset) -> Vec<f64> {
    let z = data.features();
    (0..l.rows())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; z.cols()];
            for (j, &lij) in l.row(i).iter().enumerate() {
                if lij != 0.0 {
                    for (a, &zj) in acc.iter_mut().zip(z.row(j)) {
                        *a += lij * zj;
                    }
                }
            }
            acc.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .collect()
}
