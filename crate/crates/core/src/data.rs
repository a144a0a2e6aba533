//! Datasets: CSV ingestion and export, preprocessing, synthetic generators.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pca_project, DenseMatrix};

/// Where a feature matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Raw,
    Standardized,
    Pca { components: usize },
}

/// An `n x m` feature matrix with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DenseMatrix,
    labels: Option<Vec<usize>>,
    feature_names: Option<Vec<String>>,
    provenance: Provenance,
    constant_features: Vec<usize>,
}

impl Dataset {
    pub fn new(features: DenseMatrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != features.rows() {
                return Err(Error::Dimension {
                    expected: (features.rows(), 1),
                    got: (l.len(), 1),
                });
            }
        }
        Ok(Self {
            features,
            labels,
            feature_names: None,
            provenance: Provenance::Raw,
            constant_features: Vec::new(),
        })
    }

    /// Convenience constructor from row vectors, unlabeled.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(DenseMatrix::from_rows(rows)?, None)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.m() {
            return Err(Error::Dimension {
                expected: (1, self.m()),
                got: (1, names.len()),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn with_labels(mut self, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.n() {
                return Err(Error::Dimension {
                    expected: (self.n(), 1),
                    got: (l.len(), 1),
                });
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Features that were constant when the data was standardized.
    pub fn constant_features(&self) -> &[usize] {
        &self.constant_features
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn m(&self) -> usize {
        self.features.cols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    /// Number of distinct class labels, if labeled.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.iter().max().map_or(0, |&c| c + 1))
    }

    /// Rows at `indices` (in that order), carrying labels and metadata along.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            feature_names: self.feature_names.clone(),
            provenance: self.provenance,
            constant_features: self.constant_features.clone(),
        }
    }
}

/// Options for [`load_csv`].
#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Header name, or a zero-based column index, of the class label column.
    pub label_column: Option<String>,
    /// Drop rows with missing or non-numeric feature cells instead of failing.
    pub drop_missing: bool,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "?" | "NA" | "na" | "NaN" | "nan" | "null")
}

/// Reads a comma-separated numeric dataset.
///
/// The label column (if any) is factorized to `0..C` in first-occurrence
/// order of its values.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header: Option<Vec<String>> = if options.has_header {
        Some(reader.headers()?.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let label_idx = match &options.label_column {
        None => None,
        Some(spec) => {
            let by_name = header.as_ref().and_then(|h| h.iter().position(|name| name == spec));
            match by_name.or_else(|| spec.parse::<usize>().ok()) {
                Some(i) => Some(i),
                None => {
                    return Err(Error::param(format!("label column {spec:?} not found")));
                }
            }
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    let first_line = if options.has_header { 2 } else { 1 };

    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(r + first_line, |p| p.line() as usize);
        if width.is_none() {
            width = Some(record.len());
            if let Some(li) = label_idx {
                if li >= record.len() {
                    return Err(Error::param(format!(
                        "label column {li} out of range for {} columns",
                        record.len()
                    )));
                }
            }
        }
        if Some(record.len()) != width {
            return Err(Error::Parse {
                line,
                column: record.len(),
                message: format!("expected {} fields", width.unwrap_or(0)),
            });
        }

        let mut values = Vec::with_capacity(record.len());
        let mut bad: Option<(usize, String)> = None;
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == label_idx {
                continue;
            }
            if is_missing(cell) {
                bad = Some((c, "missing value".into()));
                break;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    bad = Some((c, format!("non-numeric value {cell:?}")));
                    break;
                }
            }
        }
        if let Some((column, message)) = bad {
            if options.drop_missing {
                continue;
            }
            return Err(Error::Parse {
                line,
                column: column + 1,
                message,
            });
        }
        if let Some(li) = label_idx {
            raw_labels.push(record[li].to_owned());
        }
        rows.push(values);
    }

    let m = width.map_or(0, |w| w - usize::from(label_idx.is_some()));
    let mut data = Vec::with_capacity(rows.len() * m);
    for r in &rows {
        data.extend_from_slice(r);
    }
    let features = DenseMatrix::new(rows.len(), m, data)?;

    let labels = label_idx.map(|_| factorize(&raw_labels));
    let mut ds = Dataset::new(features, labels)?;
    if let Some(h) = header {
        let names = h
            .into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, n)| n)
            .collect();
        ds = ds.with_feature_names(names)?;
    }
    Ok(ds)
}

fn factorize(values: &[String]) -> Vec<usize> {
    let mut codes: HashMap<&str, usize> = HashMap::new();
    values
        .iter()
        .map(|v| {
            let next = codes.len();
            *codes.entry(v.as_str()).or_insert(next)
        })
        .collect()
}

/// Writes a dataset in the same CSV dialect [`load_csv`] reads, with a header
/// row and a trailing `label` column when labels are present.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<String> = match data.feature_names() {
        Some(n) => n.to_vec(),
        None => (0..data.m()).map(|j| format!("x{j}")).collect(),
    };
    if data.labels().is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = data.point(i).iter().map(|v| v.to_string()).collect();
        if let Some(l) = data.labels() {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Per-feature zero mean and unit population standard deviation.
///
/// Constant features become all zeros and are listed in
/// [`Dataset::constant_features`].
pub fn standardize(data: &Dataset) -> Dataset {
    let (n, m) = data.features().shape();
    let mut out = data.features().clone();
    let mut constant = Vec::new();
    for j in 0..m {
        let col = data.features().column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        // relative test: floating noise on a constant column leaves sd ~ 1e-16 |mean|
        let is_constant = sd <= 1e-12 * mean.abs().max(1e-300) || sd == 0.0;
        if is_constant {
            constant.push(j);
        }
        for i in 0..n {
            out[(i, j)] = if is_constant { 0.0 } else { (out[(i, j)] - mean) / sd };
        }
    }
    Dataset {
        features: out,
        labels: data.labels.clone(),
        feature_names: data.feature_names.clone(),
        provenance: Provenance::Standardized,
        constant_features: constant,
    }
}

/// Preprocessing knobs: PCA kicks in when `m > pca_threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    pub pca_threshold: usize,
    pub pca_dim: usize,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            pca_threshold: 50,
            pca_dim: 50,
        }
    }
}

/// Standardize, then reduce to `min(pca_dim, n - 1, m)` principal components
/// when the dimensionality exceeds the threshold.
pub fn preprocess(data: &Dataset, options: PreprocessOptions) -> Result<Dataset> {
    if data.n() < 2 {
        return Err(Error::DatasetTooSmall {
            n: data.n(),
            required: 2,
        });
    }
    let standardized = standardize(data);
    if data.m() > options.pca_threshold {
        let d = options.pca_dim.min(data.n() - 1).min(data.m());
        pca_project(&standardized, d)
    } else {
        Ok(standardized)
    }
}

fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Isotropic Gaussian blobs. Points are split evenly across centers, the
/// remainder going to the first center; labels are center indices.
pub fn gen_blobs(n: usize, centers: &[Vec<f64>], stds: &[f64], seed: u64) -> Result<Dataset> {
    if centers.is_empty() {
        return Err(Error::param("at least one center required"));
    }
    if stds.len() != centers.len() {
        return Err(Error::param(format!(
            "{} stds for {} centers",
            stds.len(),
            centers.len()
        )));
    }
    let m = centers[0].len();
    if m == 0 || centers.iter().any(|c| c.len() != m) {
        return Err(Error::param("centers must share a non-zero dimension"));
    }
    if stds.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
        return Err(Error::param("stds must be finite and non-negative"));
    }
    let c = centers.len();
    let mut counts = vec![n / c; c];
    counts[0] += n % c;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    for (label, ((center, &sd), &count)) in centers.iter().zip(stds).zip(&counts).enumerate() {
        for _ in 0..count {
            for &mu in center {
                let z: f64 = rng.sample(StandardNormal);
                data.push(mu + sd * z);
            }
            labels.push(label);
        }
    }
    Dataset::new(DenseMatrix::new(n, m, data)?, Some(labels))
}

/// Cluster centers of [`gen_aniso`].
pub const ANISO_CENTERS: [[f64; 2]; 2] = [[-2.5, 0.0], [2.5, 1.0]];

/// Linear maps applied to standard normal draws for each [`gen_aniso`]
/// cluster: axis scales (1.6, 0.4) rotated by +35 and -35 degrees. The
/// resulting covariance has condition number 16.
pub const ANISO_TRANSFORMS: [[[f64; 2]; 2]; 2] = [
    [
        [1.310_643_270_862_387, -0.229_430_574_540_418],
        [0.917_722_298_161_674, 0.327_660_817_715_597],
    ],
    [
        [1.310_643_270_862_387, 0.229_430_574_540_418],
        [-0.917_722_298_161_674, 0.327_660_817_715_597],
    ],
];

/// Two elongated Gaussian clusters in the plane (see [`ANISO_CENTERS`],
/// [`ANISO_TRANSFORMS`]).
pub fn gen_aniso(n: usize, seed: u64) -> Result<Dataset> {
    let mut counts = [n / 2; 2];
    counts[0] += n % 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (label, &count) in counts.iter().enumerate() {
        let t = &ANISO_TRANSFORMS[label];
        let c = &ANISO_CENTERS[label];
        for _ in 0..count {
            let (z0, z1) = normal_pair(&mut rng);
            data.push(c[0] + t[0][0] * z0 + t[0][1] * z1);
            data.push(c[1] + t[1][0] * z0 + t[1][1] * z1);
            labels.push(label);
        }
    }
    Dataset::new(DenseMatrix::new(n, 2, data)?, Some(labels))
}

/// Two interleaved unit half-circles with additive isotropic noise.
///
/// The upper moon is `(cos t, sin t)`, the lower `(1 - cos t, 0.5 - sin t)`,
/// `t` evenly spaced over `[0, π]`. The first `ceil(n/2)` rows are the upper
/// moon (label 0).
pub fn gen_moons(n: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::param("noise_sd must be finite and non-negative"));
    }
    let n_upper = n - n / 2;
    let n_lower = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (label, count) in [(0usize, n_upper), (1, n_lower)] {
        for i in 0..count {
            let t = if count > 1 {
                std::f64::consts::PI * i as f64 / (count - 1) as f64
            } else {
                0.0
            };
            let (x, y) = if label == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            let (z0, z1) = normal_pair(&mut rng);
            data.push(x + noise_sd * z0);
            data.push(y + noise_sd * z1);
            labels.push(label);
        }
    }
    Dataset::new(DenseMatrix::new(n, 2, data)?, Some(labels))
}
