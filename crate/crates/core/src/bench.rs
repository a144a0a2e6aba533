//! Wall-clock scaling of the k-NN and curvature stages.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::curvature::curvature_scores;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::experiment::median;
use crate::knn::{build_knn_graph, NeighborGraph};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    N,
    M,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::N => "n",
            Axis::M => "m",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub axis: Axis,
    /// Values of the swept axis.
    pub grid: Vec<usize>,
    /// Sample count when sweeping `m`.
    pub n: usize,
    /// Dimension when sweeping `n`.
    pub m: usize,
    pub k: usize,
    pub repetitions: usize,
    /// Worker threads for the curvature stage.
    pub threads: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub knn_secs: f64,
    pub curvature_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub axis: Axis,
    pub points: Vec<GridPoint>,
    pub repetitions: usize,
    pub threads: usize,
    /// Log-log slopes; `None` with fewer than two grid values.
    pub knn_slope: Option<f64>,
    pub curvature_slope: Option<f64>,
    pub total_slope: Option<f64>,
}

impl ScalingReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "m", "k", "knn_secs", "curvature_secs", "total_secs"])?;
        for p in &self.points {
            w.write_record([
                p.n.to_string(),
                p.m.to_string(),
                p.k.to_string(),
                p.knn_secs.to_string(),
                p.curvature_secs.to_string(),
                p.total_secs.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Plain-text summary for logs.
    pub fn summary(&self) -> String {
        let slope = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        let mut out = format!(
            "scaling in {} ({} repetitions, {} threads)\n",
            self.axis, self.repetitions, self.threads
        );
        for p in &self.points {
            out.push_str(&format!(
                "  n={:>6} m={:>3} k={:>3}  knn {:>9.4}s  curvature {:>9.4}s  total {:>9.4}s\n",
                p.n, p.m, p.k, p.knn_secs, p.curvature_secs, p.total_secs
            ));
        }
        out.push_str(&format!(
            "  slopes: knn {}, curvature {}, total {}\n",
            slope(self.knn_slope),
            slope(self.curvature_slope),
            slope(self.total_slope)
        ));
        out
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Standard normal sample of shape `n x m`.
pub fn gaussian_dataset(n: usize, m: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n * m).map(|_| StandardNormal.sample(&mut rng)).collect();
    Dataset::new(DenseMatrix::new(n, m, values)?, None)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::param(format!("cannot build a {threads}-thread pool: {e}")))
}

/// Median wall time of the curvature stage on `threads` workers, after one
/// discarded warmup run.
pub fn time_curvature(data: &Dataset, graph: &NeighborGraph, threads: usize, repetitions: usize) -> Result<f64> {
    let pool = pool(threads)?;
    pool.install(|| {
        curvature_scores(data, graph)?;
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let t = Instant::now();
            curvature_scores(data, graph)?;
            times.push(t.elapsed().as_secs_f64());
        }
        Ok(median(&times).unwrap_or(0.0))
    })
}

/// Times both stages over the grid. Data generation is excluded from the
/// timings; each grid value gets one warmup run that is discarded.
pub fn run_scaling(config: &ScalingConfig) -> Result<ScalingReport> {
    if config.grid.is_empty() || config.repetitions == 0 || config.threads == 0 {
        return Err(Error::param(
            "grid, repetitions and threads must be non-empty / positive",
        ));
    }
    let mut grid = config.grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let pool = pool(config.threads)?;

    let mut points = Vec::with_capacity(grid.len());
    for &g in &grid {
        let (n, m) = match config.axis {
            Axis::N => (g, config.m),
            Axis::M => (config.n, g),
        };
        let data = gaussian_dataset(n, m, config.seed)?;
        let (knn, curv, total) = pool.install(|| -> Result<(f64, f64, f64)> {
            let graph = build_knn_graph(&data, config.k)?;
            curvature_scores(&data, &graph)?;
            let mut knn = Vec::new();
            let mut curv = Vec::new();
            let mut total = Vec::new();
            for _ in 0..config.repetitions {
                let t0 = Instant::now();
                let graph = build_knn_graph(&data, config.k)?;
                let t1 = Instant::now();
                curvature_scores(&data, &graph)?;
                let t2 = Instant::now();
                knn.push((t1 - t0).as_secs_f64());
                curv.push((t2 - t1).as_secs_f64());
                total.push((t2 - t0).as_secs_f64());
            }
            Ok((median(&knn).unwrap(), median(&curv).unwrap(), median(&total).unwrap()))
        })?;
        points.push(GridPoint {
            n,
            m,
            k: config.k,
            knn_secs: knn,
            curvature_secs: curv,
            total_secs: total,
        });
    }

    let x: Vec<f64> = grid.iter().map(|&g| g as f64).collect();
    let fit = |f: fn(&GridPoint) -> f64| loglog_slope(&x, &points.iter().map(f).collect::<Vec<_>>());
    Ok(ScalingReport {
        axis: config.axis,
        repetitions: config.repetitions,
        threads: config.threads,
        knn_slope: fit(|p| p.knn_secs),
        curvature_slope: fit(|p| p.curvature_secs),
        total_slope: fit(|p| p.total_secs),
        points,
    })
}
