//! Dense real linear algebra.
//!
//! Everything here works on [`DenseMatrix`], a row-major `f64` matrix. The
//! symmetric eigensolver is a cyclic Jacobi iteration, which is unconditionally
//! stable for symmetric input and fast enough for the small (m <= 50) local
//! covariance matrices the curvature estimator produces.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Provenance};
use crate::error::{Error, Result};

/// Row-major dense matrix: `data[i * cols + j]` holds entry `(i, j)`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting length mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: (rows, cols),
                got: (data.len(), 1),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension {
                    expected: (i, cols),
                    got: (i, r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::Dimension {
                    expected: (rows, cols),
                    got: (c.len(), j),
                });
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        if let Some(pos) = m.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: (self.cols, other.cols),
                got: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * selfᵀ`, exploiting symmetry of the result.
    pub fn gram_rows(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = dot(self.row(i), self.row(j));
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute difference between `(i, j)` and `(j, i)`.
    pub fn symmetry_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows.min(self.cols) {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in self.row_iter() {
            writeln!(f, "  {r:?}")?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Eigenpairs of a symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    /// Sorted non-increasing; equal values keep their original column order.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the unit eigenvector for `eigenvalues[j]`, with its
    /// largest-magnitude entry positive.
    pub eigenvectors: DenseMatrix,
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-9;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(a: &DenseMatrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let norm = a.frobenius_norm();
    let deviation = a.symmetry_deviation();
    if deviation > SYMMETRY_TOL * norm {
        return Err(Error::NotSymmetric { deviation });
    }

    // work on the exactly symmetric part
    let mut w = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let mut v = DenseMatrix::identity(n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&w) < JACOBI_TOL * norm || norm == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep the original column order
    order.sort_by(|&i, &j| w[(j, j)].total_cmp(&w[(i, i)]));

    let eigenvalues = order.iter().map(|&i| w[(i, i)]).collect();
    let mut eigenvectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut lead = 0;
        for r in 0..n {
            if v[(r, src)].abs() > v[(lead, src)].abs() {
                lead = r;
            }
        }
        let sign = if v[(lead, src)] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            eigenvectors[(r, dst)] = sign * v[(r, src)];
        }
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[(p, q)]`, accumulated into `v`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// Local scatter of a patch around its center point.
///
/// `patch` is `m x (k+1)` with the center as its first column; the result is
/// `(1/k) Σ_j (x_j - c)(x_j - c)ᵀ` over every column (the center column adds
/// nothing).
pub fn covariance(patch: &DenseMatrix, center: &[f64]) -> Result<DenseMatrix> {
    let m = patch.rows();
    if patch.cols() < 2 {
        return Err(Error::DegeneratePatch(format!(
            "patch has {} column(s), need at least 2",
            patch.cols()
        )));
    }
    if center.len() != m {
        return Err(Error::Dimension {
            expected: (m, 1),
            got: (center.len(), 1),
        });
    }
    let k = (patch.cols() - 1) as f64;
    let mut cov = DenseMatrix::zeros(m, m);
    let mut diff = vec![0.0; m];
    for j in 0..patch.cols() {
        for (r, d) in diff.iter_mut().enumerate() {
            *d = patch[(r, j)] - center[r];
        }
        for r in 0..m {
            if diff[r] == 0.0 {
                continue;
            }
            for s in r..m {
                cov[(r, s)] += diff[r] * diff[s];
            }
        }
    }
    for r in 0..m {
        for s in r..m {
            let v = cov[(r, s)] / k;
            cov[(r, s)] = v;
            cov[(s, r)] = v;
        }
    }
    Ok(cov)
}

/// Projects a dataset onto its top `d` principal components.
///
/// Uses the `m x m` feature covariance when `m <= n` and the `n x n` Gram
/// matrix otherwise; both give the same components.
pub fn pca_project(data: &Dataset, d: usize) -> Result<Dataset> {
    let x = data.features();
    let (n, m) = x.shape();
    if n < 2 || d == 0 || d > m.min(n - 1) {
        return Err(Error::param(format!(
            "PCA dimension {d} out of range 1..={} for {n}x{m} data",
            m.min(n.saturating_sub(1))
        )));
    }

    let mut means = vec![0.0; m];
    for row in x.row_iter() {
        for (mu, v) in means.iter_mut().zip(row) {
            *mu += v;
        }
    }
    means.iter_mut().for_each(|mu| *mu /= n as f64);
    let mut centered = x.clone();
    for i in 0..n {
        for (v, mu) in centered.row_mut(i).iter_mut().zip(&means) {
            *v -= mu;
        }
    }

    // directions: m x d, unit columns
    let mut directions = DenseMatrix::zeros(m, d);
    if m <= n {
        let cov = centered.transpose().gram_rows().scale(1.0 / (n - 1) as f64);
        let eig = sym_eig(&cov)?;
        for j in 0..d {
            for r in 0..m {
                directions[(r, j)] = eig.eigenvectors[(r, j)];
            }
        }
    } else {
        let gram = centered.gram_rows();
        let eig = sym_eig(&gram)?;
        for j in 0..d {
            let lambda = eig.eigenvalues[j];
            if lambda <= 0.0 {
                return Err(Error::param(format!("PCA dimension {d} exceeds the data rank")));
            }
            let u = eig.eigenvectors.column(j);
            let mut dir = vec![0.0; m];
            for (i, ui) in u.iter().enumerate() {
                for (dr, xv) in dir.iter_mut().zip(centered.row(i)) {
                    *dr += xv * ui;
                }
            }
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut lead = 0;
            for r in 0..m {
                if dir[r].abs() > dir[lead].abs() {
                    lead = r;
                }
            }
            let sign = if dir[lead] < 0.0 { -1.0 } else { 1.0 };
            for r in 0..m {
                directions[(r, j)] = sign * dir[r] / norm;
            }
        }
    }

    let projected = centered.matmul(&directions)?;
    let names = (1..=d).map(|i| format!("pc{i}")).collect();
    Ok(Dataset::new(projected, data.labels().map(<[usize]>::to_vec))?
        .with_feature_names(names)?
        .with_provenance(Provenance::Pca { components: d }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    fn reconstruct(e: &EigenDecomposition) -> DenseMatrix {
        let n = e.eigenvalues.len();
        let mut out = DenseMatrix::zeros(n, n);
        for (j, &l) in e.eigenvalues.iter().enumerate() {
            for r in 0..n {
                for s in 0..n {
                    out[(r, s)] += l * e.eigenvectors[(r, j)] * e.eigenvectors[(s, j)];
                }
            }
        }
        out
    }

    #[test]
    fn diagonal_matrix() {
        let a = DenseMatrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert_eq!(e.eigenvalues, vec![2.0, 1.0]);
        assert_eq!(e.eigenvectors, DenseMatrix::identity(2));
    }

    #[test]
    fn swap_matrix() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.eigenvectors.column(0);
        let v1 = e.eigenvectors.column(1);
        assert!((v0[0] - h).abs() < 1e-14 && (v0[1] - h).abs() < 1e-14);
        // sign convention: largest-magnitude entry positive (first on ties)
        assert!((v1[0] - h).abs() < 1e-14 && (v1[1] + h).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        for (n, seed) in [(6, 1), (13, 2), (32, 3), (64, 4)] {
            let a = random_symmetric(n, seed);
            let e = sym_eig(&a).unwrap();
            let err = a.sub(&reconstruct(&e)).unwrap().frobenius_norm();
            assert!(err <= 1e-8 * a.frobenius_norm().max(1.0), "n={n} err={err}");
            let vtv = e.eigenvectors.transpose().matmul(&e.eigenvectors).unwrap();
            let ortho = vtv.sub(&DenseMatrix::identity(n)).unwrap();
            assert!(ortho.as_slice().iter().all(|v| v.abs() < 1e-8));
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            for j in 0..n {
                let vj = e.eigenvectors.column(j);
                for r in 0..n {
                    let av = dot(a.row(r), &vj);
                    assert!((av - e.eigenvalues[j] * vj[r]).abs() <= 1e-7 * a.frobenius_norm());
                }
            }
        }
    }

    #[test]
    fn deterministic_for_identical_input() {
        let a = random_symmetric(9, 11);
        assert_eq!(sym_eig(&a).unwrap(), sym_eig(&a.clone()).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(sym_eig(&rect), Err(Error::NotSquare { .. })));
        let asym = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&asym), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn equal_eigenvalues_keep_column_order() {
        let e = sym_eig(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvectors, DenseMatrix::identity(3));
        let z = sym_eig(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(z.eigenvalues, vec![0.0, 0.0]);
    }

    #[test]
    fn covariance_hand_example() {
        let patch = DenseMatrix::from_columns(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let cov = covariance(&patch, &[0.0, 0.0]).unwrap();
        assert_eq!(cov, DenseMatrix::from_rows(&[[0.5, 0.0], [0.0, 0.5]]).unwrap());
    }

    #[test]
    fn covariance_identical_columns_is_zero() {
        let patch = DenseMatrix::from_columns(&[[3.0, -1.0, 2.0]; 5]).unwrap();
        let cov = covariance(&patch, &[3.0, -1.0, 2.0]).unwrap();
        assert!(cov.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn covariance_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cols: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let patch = DenseMatrix::from_columns(&cols).unwrap();
        let cov = covariance(&patch, &cols[0]).unwrap();
        for r in 0..3 {
            for s in 0..3 {
                let mut acc = 0.0;
                for c in &cols {
                    acc += (c[r] - cols[0][r]) * (c[s] - cols[0][s]);
                }
                assert!((cov[(r, s)] - acc / 9.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_rejects_single_column() {
        let patch = DenseMatrix::from_columns(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(
            covariance(&patch, &[1.0, 2.0]),
            Err(Error::DegeneratePatch(_))
        ));
    }

    #[test]
    fn matrix_constructor_checks() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }
}
