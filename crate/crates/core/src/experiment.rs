//! Baseline-versus-treatment clustering experiments over a seed list.
//!
//! Each [`Strategy`] compares a clustering of the full data (baseline) with
//! one that uses the curvature split (treatment) and reports the median of
//! every validity index over the seeds.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{
    hdbscan_best_mcs, hdbscan_s_centroids, hybrid_1nn, kmeans_pp, s_centroid_init, DEFAULT_MCS_CANDIDATES,
};
use crate::curvature::mcbp;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::filter::{partition, Partition};
use crate::knn::default_k;
use crate::metrics::{evaluate, IndexScores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// k-means++ on `X` versus k-means++ on `S` (each scored on its own data).
    FilteredKmeans,
    /// k-means++ on `X` versus k-means on `X` seeded with `S` centroids.
    SCentroids,
    /// HDBSCAN* on `X` versus HDBSCAN* on `S`.
    HdbscanFilter,
    /// HDBSCAN* on `X` versus k-means on `X` seeded with HDBSCAN* `S` means.
    HdbscanSCentroids,
    /// HDBSCAN* on `X` versus HDBSCAN* on `S` with 1-NN labels for `B`.
    #[serde(rename = "hybrid-1nn")]
    Hybrid1nn,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::FilteredKmeans,
        Strategy::SCentroids,
        Strategy::HdbscanFilter,
        Strategy::HdbscanSCentroids,
        Strategy::Hybrid1nn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::FilteredKmeans => "filtered-kmeans",
            Strategy::SCentroids => "s-centroids",
            Strategy::HdbscanFilter => "hdbscan-filter",
            Strategy::HdbscanSCentroids => "hdbscan-s-centroids",
            Strategy::Hybrid1nn => "hybrid-1nn",
        }
    }

    /// Whether results depend on the seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Strategy::FilteredKmeans | Strategy::SCentroids)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Strategy::ALL.iter().map(|s| s.name()).collect();
            Error::param(format!("unknown strategy '{s}', expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Neighborhood size; `None` uses `⌊log₂ n⌋`.
    pub k: Option<usize>,
    pub p: f64,
    pub seeds: Vec<u64>,
    pub mcs_candidates: Vec<usize>,
    /// Number of k-means clusters; `None` takes the dataset's class count.
    pub n_clusters: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k: None,
            p: 0.75,
            seeds: (0..20).collect(),
            mcs_candidates: DEFAULT_MCS_CANDIDATES.to_vec(),
            n_clusters: None,
        }
    }
}

/// Medians of the three indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub silhouette: f64,
    pub calinski_harabasz: f64,
    pub davies_bouldin: f64,
}

/// Index values of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub baseline: Option<IndexScores>,
    pub treatment: Option<IndexScores>,
    pub baseline_mcs: Option<usize>,
    pub treatment_mcs: Option<usize>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub dataset: String,
    pub strategy: Strategy,
    pub baseline: IndexSummary,
    pub treatment: IndexSummary,
    pub k: usize,
    pub p: f64,
    pub boundary_points: usize,
    /// Seeds that produced both a baseline and a treatment score.
    pub runs: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub row: TableRow,
    pub runs: Vec<RunRecord>,
}

pub const TABLE_HEADER: [&str; 13] = [
    "dataset",
    "strategy",
    "sc_baseline",
    "ch_baseline",
    "db_baseline",
    "sc_treatment",
    "ch_treatment",
    "db_treatment",
    "k",
    "p",
    "boundary_points",
    "runs",
    "failures",
];

/// Writes rows in the baseline/treatment table layout.
pub fn write_table<W: Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.strategy.to_string(),
            r.baseline.silhouette.to_string(),
            r.baseline.calinski_harabasz.to_string(),
            r.baseline.davies_bouldin.to_string(),
            r.treatment.silhouette.to_string(),
            r.treatment.calinski_harabasz.to_string(),
            r.treatment.davies_bouldin.to_string(),
            r.k.to_string(),
            r.p.to_string(),
            r.boundary_points.to_string(),
            r.runs.to_string(),
            r.failures.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Median with the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn summarize<'a>(scores: impl Iterator<Item = &'a IndexScores> + Clone) -> IndexSummary {
    let pick = |f: fn(&IndexScores) -> f64| median(&scores.clone().map(f).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    IndexSummary {
        silhouette: pick(|s| s.silhouette),
        calinski_harabasz: pick(|s| s.calinski_harabasz),
        davies_bouldin: pick(|s| s.davies_bouldin),
    }
}

struct Context<'a> {
    data: &'a Dataset,
    part: Partition,
    c: Option<usize>,
    mcs: &'a [usize],
}

fn kmeans_clusters(ctx: &Context) -> Result<usize> {
    ctx.c
        .ok_or_else(|| Error::param("k-means strategies need a cluster count (labels or n_clusters)"))
}

fn baseline(strategy: Strategy, ctx: &Context, seed: u64) -> Result<(IndexScores, Option<usize>)> {
    if strategy.is_stochastic() {
        let r = kmeans_pp(ctx.data, kmeans_clusters(ctx)?, seed)?;
        Ok((evaluate(ctx.data, &r.labels)?, None))
    } else {
        let (r, mcs) = hdbscan_best_mcs(ctx.data, ctx.mcs)?;
        Ok((evaluate(ctx.data, &r.labels)?, Some(mcs)))
    }
}

fn treatment(strategy: Strategy, ctx: &Context, seed: u64) -> Result<(IndexScores, Option<usize>)> {
    let smooth = || ctx.part.smooth(ctx.data);
    match strategy {
        Strategy::FilteredKmeans => {
            let s = smooth();
            let r = kmeans_pp(&s, kmeans_clusters(ctx)?, seed)?;
            Ok((evaluate(&s, &r.labels)?, None))
        }
        Strategy::SCentroids => {
            let r = s_centroid_init(ctx.data, &ctx.part, kmeans_clusters(ctx)?, seed)?;
            Ok((evaluate(ctx.data, &r.labels)?, None))
        }
        Strategy::HdbscanFilter => {
            let s = smooth();
            let (r, mcs) = hdbscan_best_mcs(&s, ctx.mcs)?;
            Ok((evaluate(&s, &r.labels)?, Some(mcs)))
        }
        Strategy::HdbscanSCentroids => {
            let (r, mcs) = hdbscan_s_centroids(ctx.data, &ctx.part, ctx.mcs)?;
            Ok((evaluate(ctx.data, &r.labels)?, Some(mcs)))
        }
        Strategy::Hybrid1nn => {
            let (r, mcs) = hybrid_1nn(ctx.data, &ctx.part, ctx.mcs)?;
            Ok((evaluate(ctx.data, &r.labels)?, Some(mcs)))
        }
    }
}

/// Runs one strategy on one (already preprocessed) dataset.
///
/// Seeds run concurrently. Deterministic strategies run once, under the
/// first seed. A seed whose baseline or treatment fails is recorded and
/// skipped; the call fails only when no seed succeeds.
pub fn run_experiment(
    name: &str,
    data: &Dataset,
    strategy: Strategy,
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome> {
    if config.seeds.is_empty() {
        return Err(Error::param("seed list is empty"));
    }
    let k = match config.k {
        Some(k) => k,
        None => default_k(data.n())?,
    };
    let report = mcbp(data, k, config.p)?;
    let ctx = Context {
        data,
        part: partition(data, &report)?,
        c: config.n_clusters.or_else(|| data.n_classes()),
        mcs: &config.mcs_candidates,
    };
    let seeds: &[u64] = if strategy.is_stochastic() {
        &config.seeds
    } else {
        &config.seeds[..1]
    };

    let runs: Vec<RunRecord> = seeds
        .par_iter()
        .map(|&seed| {
            let mut errors = Vec::new();
            let b = baseline(strategy, &ctx, seed)
                .map_err(|e| errors.push(format!("baseline: {e}")))
                .ok();
            let t = treatment(strategy, &ctx, seed)
                .map_err(|e| errors.push(format!("treatment: {e}")))
                .ok();
            RunRecord {
                seed,
                baseline_mcs: b.as_ref().and_then(|x| x.1),
                treatment_mcs: t.as_ref().and_then(|x| x.1),
                baseline: b.map(|x| x.0),
                treatment: t.map(|x| x.0),
                errors,
            }
        })
        .collect();

    let ok: Vec<&RunRecord> = runs.iter().filter(|r| r.errors.is_empty()).collect();
    if ok.is_empty() {
        return Err(Error::NoValidClustering(format!(
            "{strategy} on {name}: every seed failed ({})",
            runs[0].errors.join("; ")
        )));
    }
    let row = TableRow {
        dataset: name.to_string(),
        strategy,
        baseline: summarize(ok.iter().filter_map(|r| r.baseline.as_ref())),
        treatment: summarize(ok.iter().filter_map(|r| r.treatment.as_ref())),
        k,
        p: config.p,
        boundary_points: ctx.part.boundary_indices.len(),
        runs: ok.len(),
        failures: runs.len() - ok.len(),
    };
    Ok(ExperimentOutcome { row, runs })
}
