//! Mean-curvature boundary scoring.
//!
//! For every point `x_i` with k-NN patch `P_i = {x_i} ∪ N(x_i)`:
//!
//! 1. `Σ_i = (1/k) Σ_{x_j ∈ P_i} (x_j - x_i)(x_j - x_i)ᵀ`
//! 2. `U_i` = eigenvectors of `Σ_i` (columns `u_1..u_m`)
//! 3. design matrix `[1, u_1..u_m, u_1⊙u_1..u_m⊙u_m, u_a⊙u_b (a<b)]`
//! 4. `H_i` = quadratic block of the design matrix, `𝓗_i = H_i H_iᵀ`
//! 5. shape operator `𝓢_i = 𝓗_i Σ_i`, score `K_i = tr(𝓢_i)`
//!
//! The `u_j` are the m-dimensional eigenvectors themselves, which is what
//! makes `𝓗_i Σ_i` a product of two `m x m` matrices. Since `U_i` is
//! orthonormal, `H_i H_iᵀ = (I + Q Qᵀ) / 2` with `Q = U_i ⊙ U_i`; the scoring
//! loop uses that O(m³) form, while [`mean_curvature_at`] builds every
//! intermediate literally for inspection.
//!
//! Scores are min-max normalized and thresholded at the `p`-th percentile;
//! points with normalized score `>= T` are flagged as boundary points.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::knn::{build_knn_graph, NeighborGraph};
use crate::linalg::{covariance, sym_eig, DenseMatrix};

/// Every intermediate of the per-point estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGeometry {
    pub covariance: DenseMatrix,
    pub eigenvalues: Vec<f64>,
    pub eigenbasis: DenseMatrix,
    pub design: DenseMatrix,
    pub quadratic_block: DenseMatrix,
    pub hessian: DenseMatrix,
    pub shape_operator: DenseMatrix,
    /// The patch had zero spread (all neighbors coincide with the point).
    pub degenerate: bool,
}

/// Output of [`mcbp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub raw_scores: Vec<f64>,
    pub normalized_scores: Vec<f64>,
    pub threshold: f64,
    pub boundary_flags: Vec<bool>,
    pub k: usize,
    pub p: f64,
    /// All raw scores were equal; nothing is flagged.
    pub degenerate_scores: bool,
    /// Points whose patch had zero spread (score forced to 0).
    pub degenerate_patches: Vec<usize>,
}

impl CurvatureReport {
    pub fn n(&self) -> usize {
        self.raw_scores.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_flags.iter().filter(|&&b| b).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "raw_K", "norm_K", "boundary"])?;
        for i in 0..self.n() {
            w.write_record([
                i.to_string(),
                self.raw_scores[i].to_string(),
                self.normalized_scores[i].to_string(),
                u8::from(self.boundary_flags[i]).to_string(),
            ])?;
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

/// Number of quadratic monomials in `m` variables.
pub fn quadratic_terms(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Design matrix `m x (1 + m + m(m+1)/2)` from an orthonormal eigenbasis.
///
/// Column order: ones, `u_1..u_m`, squares `u_a⊙u_a`, then cross terms
/// `u_a⊙u_b` for `a < b` in lexicographic order.
pub fn local_design_matrix(eigvecs: &DenseMatrix) -> Result<DenseMatrix> {
    if !eigvecs.is_square() {
        return Err(Error::NotSquare {
            rows: eigvecs.rows(),
            cols: eigvecs.cols(),
        });
    }
    let m = eigvecs.rows();
    let mut design = DenseMatrix::zeros(m, 1 + m + quadratic_terms(m));
    for r in 0..m {
        design[(r, 0)] = 1.0;
        for a in 0..m {
            let v = eigvecs[(r, a)];
            design[(r, 1 + a)] = v;
            design[(r, 1 + m + a)] = v * v;
        }
        let mut col = 1 + 2 * m;
        for a in 0..m {
            for b in (a + 1)..m {
                design[(r, col)] = eigvecs[(r, a)] * eigvecs[(r, b)];
                col += 1;
            }
        }
    }
    Ok(design)
}

/// Extracts the quadratic block `H` of a design matrix and returns it with
/// `H Hᵀ`.
fn split_quadratic(design: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let m = design.rows();
    let expected = 1 + m + quadratic_terms(m);
    if design.cols() != expected {
        return Err(Error::Dimension {
            expected: (m, expected),
            got: design.shape(),
        });
    }
    let q = quadratic_terms(m);
    let mut block = DenseMatrix::zeros(m, q);
    for r in 0..m {
        block.row_mut(r).copy_from_slice(&design.row(r)[1 + m..]);
    }
    let hessian = block.gram_rows();
    Ok((block, hessian))
}

/// `H Hᵀ` from the quadratic columns of a design matrix.
pub fn hessian_form(design: &DenseMatrix) -> Result<DenseMatrix> {
    split_quadratic(design).map(|(_, h)| h)
}

/// `H Hᵀ` straight from an orthonormal basis, via `(I + Q Qᵀ)/2`, `Q = U⊙U`.
fn hessian_from_basis(u: &DenseMatrix) -> DenseMatrix {
    let m = u.rows();
    let mut sq = u.clone();
    for r in 0..m {
        for v in sq.row_mut(r) {
            *v *= *v;
        }
    }
    let mut h = sq.gram_rows();
    for r in 0..m {
        for s in 0..m {
            h[(r, s)] = 0.5 * (h[(r, s)] + if r == s { 1.0 } else { 0.0 });
        }
    }
    h
}

fn patch_matrix(point: usize, data: &Dataset, graph: &NeighborGraph) -> DenseMatrix {
    let m = data.m();
    let nbrs = &graph.neighbors[point];
    let mut patch = DenseMatrix::zeros(m, nbrs.len() + 1);
    for (c, &j) in std::iter::once(&point).chain(nbrs).enumerate() {
        for (r, &v) in data.point(j).iter().enumerate() {
            patch[(r, c)] = v;
        }
    }
    patch
}

fn check_graph(point: usize, data: &Dataset, graph: &NeighborGraph) -> Result<()> {
    if graph.n() != data.n() {
        return Err(Error::Dimension {
            expected: (data.n(), graph.k),
            got: (graph.n(), graph.k),
        });
    }
    if point >= data.n() {
        return Err(Error::param(format!("point {point} out of range for n = {}", data.n())));
    }
    if graph.k < 2 {
        return Err(Error::param(format!("k = {} must be at least 2", graph.k)));
    }
    Ok(())
}

/// Score of one point together with every intermediate matrix.
pub fn mean_curvature_at(point: usize, data: &Dataset, graph: &NeighborGraph) -> Result<(f64, LocalGeometry)> {
    check_graph(point, data, graph)?;
    let patch = patch_matrix(point, data, graph);
    let cov = covariance(&patch, data.point(point))?;
    let degenerate = cov.as_slice().iter().all(|&v| v == 0.0);
    let eig = sym_eig(&cov)?;
    let design = local_design_matrix(&eig.eigenvectors)?;
    let (quadratic_block, hessian) = split_quadratic(&design)?;
    let shape_operator = hessian.matmul(&cov)?;
    let k_i = if degenerate { 0.0 } else { shape_operator.trace() };
    Ok((
        k_i,
        LocalGeometry {
            covariance: cov,
            eigenvalues: eig.eigenvalues,
            eigenbasis: eig.eigenvectors,
            design,
            quadratic_block,
            hessian,
            shape_operator,
            degenerate,
        },
    ))
}

/// Score of one point (fast path). Returns `(K_i, degenerate)`.
fn score_point(point: usize, data: &Dataset, graph: &NeighborGraph) -> Result<(f64, bool)> {
    let patch = patch_matrix(point, data, graph);
    let cov = covariance(&patch, data.point(point))?;
    if cov.as_slice().iter().all(|&v| v == 0.0) {
        return Ok((0.0, true));
    }
    let eig = sym_eig(&cov)?;
    let hessian = hessian_from_basis(&eig.eigenvectors);
    // tr(𝓗Σ) for symmetric 𝓗, Σ is the elementwise inner product
    let k_i = hessian.as_slice().iter().zip(cov.as_slice()).map(|(a, b)| a * b).sum();
    Ok((k_i, false))
}

/// Raw scores for every point plus the indices of zero-spread patches.
///
/// Points are scored in parallel on the current rayon pool; the result does
/// not depend on scheduling.
pub fn curvature_scores(data: &Dataset, graph: &NeighborGraph) -> Result<(Vec<f64>, Vec<usize>)> {
    if data.n() > 0 {
        check_graph(0, data, graph)?;
    }
    let scored: Vec<(f64, bool)> = (0..data.n())
        .into_par_iter()
        .map(|i| score_point(i, data, graph))
        .collect::<Result<_>>()?;
    let degenerate = scored.iter().enumerate().filter(|(_, s)| s.1).map(|(i, _)| i).collect();
    Ok((scored.into_iter().map(|s| s.0).collect(), degenerate))
}

/// Min-max normalization to `[0, 1]`.
///
/// Returns the scores and a flag that is set when every input is equal, in
/// which case all normalized scores are zero.
pub fn normalize_scores(raw: &[f64]) -> Result<(Vec<f64>, bool)> {
    if raw.is_empty() {
        return Err(Error::param("cannot normalize an empty score vector"));
    }
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Ok((vec![0.0; raw.len()], true));
    }
    let span = hi - lo;
    Ok((raw.iter().map(|&v| (v - lo) / span).collect(), false))
}

/// Linear-interpolation percentile: rank `p (n - 1)` between the bracketing
/// order statistics.
pub fn percentile_threshold(scores: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("percentile p = {p} must lie in (0, 1)")));
    }
    if scores.is_empty() {
        return Err(Error::param("percentile of an empty score vector"));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = p * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Runs the full boundary detector with a freshly built k-NN graph.
pub fn mcbp(data: &Dataset, k: usize, p: f64) -> Result<CurvatureReport> {
    if k < 2 {
        return Err(Error::param(format!("k = {k} must be at least 2")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("percentile p = {p} must lie in (0, 1)")));
    }
    if data.n() < k + 2 {
        return Err(Error::DatasetTooSmall {
            n: data.n(),
            required: k + 2,
        });
    }
    let graph = build_knn_graph(data, k)?;
    mcbp_with_graph(data, &graph, p)
}

/// Boundary detector over a precomputed graph.
pub fn mcbp_with_graph(data: &Dataset, graph: &NeighborGraph, p: f64) -> Result<CurvatureReport> {
    let (raw_scores, degenerate_patches) = curvature_scores(data, graph)?;
    let (normalized_scores, degenerate_scores) = normalize_scores(&raw_scores)?;
    let (threshold, boundary_flags) = if degenerate_scores {
        // every normalized score is 0; a threshold of 1 flags nothing
        (1.0, vec![false; raw_scores.len()])
    } else {
        let t = percentile_threshold(&normalized_scores, p)?;
        let flags = normalized_scores.iter().map(|&s| s >= t).collect();
        (t, flags)
    };
    Ok(CurvatureReport {
        raw_scores,
        normalized_scores,
        threshold,
        boundary_flags,
        k: graph.k,
        p,
        degenerate_scores,
        degenerate_patches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_blobs;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_orthonormal(m: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v: f64 = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        sym_eig(&a).unwrap().eigenvectors
    }

    #[test]
    fn design_layout_m3() {
        let u = random_orthonormal(3, 1);
        let x = local_design_matrix(&u).unwrap();
        assert_eq!(x.shape(), (3, 10));
        let col = |j: usize| u.column(j);
        let had = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>();
        let expected: Vec<Vec<f64>> = vec![
            vec![1.0; 3],
            col(0),
            col(1),
            col(2),
            had(&col(0), &col(0)),
            had(&col(1), &col(1)),
            had(&col(2), &col(2)),
            had(&col(0), &col(1)),
            had(&col(0), &col(2)),
            had(&col(1), &col(2)),
        ];
        for (j, e) in expected.iter().enumerate() {
            assert_eq!(&x.column(j), e, "column {j}");
        }
    }

    #[test]
    fn design_scalar_case() {
        let x = local_design_matrix(&DenseMatrix::identity(1)).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0, 1.0]);
        assert!(local_design_matrix(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn identity_basis_hessian() {
        let x = local_design_matrix(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(x.column(3), vec![1.0, 0.0]);
        assert_eq!(x.column(4), vec![0.0, 1.0]);
        assert_eq!(x.column(5), vec![0.0, 0.0]);
        assert_eq!(hessian_form(&x).unwrap(), DenseMatrix::identity(2));
    }

    #[test]
    fn rotated_basis_hessian() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = DenseMatrix::from_columns(&[[h, h], [h, -h]]).unwrap();
        let hess = hessian_form(&local_design_matrix(&u).unwrap()).unwrap();
        let expected = [[0.75, 0.25], [0.25, 0.75]];
        for r in 0..2 {
            for s in 0..2 {
                assert!((hess[(r, s)] - expected[r][s]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hessian_shape_error() {
        assert!(hessian_form(&DenseMatrix::zeros(2, 5)).is_err());
    }

    #[test]
    fn hessian_is_psd_and_matches_closed_form() {
        for (m, seed) in [(2, 3), (5, 4), (9, 5), (20, 6)] {
            let u = random_orthonormal(m, seed);
            let literal = hessian_form(&local_design_matrix(&u).unwrap()).unwrap();
            let fast = hessian_from_basis(&u);
            assert!(literal.sub(&fast).unwrap().frobenius_norm() < 1e-12);
            let eig = sym_eig(&literal).unwrap();
            assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10));
        }
    }

    #[test]
    fn hessian_sign_and_permutation_invariant() {
        let u = random_orthonormal(5, 9);
        let base = hessian_form(&local_design_matrix(&u).unwrap()).unwrap();
        let perm = [3, 0, 4, 1, 2];
        let signs = [1.0, -1.0, -1.0, 1.0, -1.0];
        let mut w = DenseMatrix::zeros(5, 5);
        for (dst, &src) in perm.iter().enumerate() {
            for r in 0..5 {
                w[(r, dst)] = signs[dst] * u[(r, src)];
            }
        }
        let other = hessian_form(&local_design_matrix(&w).unwrap()).unwrap();
        assert!(base.sub(&other).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn identical_patch_scores_zero() {
        let mut rows = vec![[2.0, 3.0]; 6];
        rows.extend([[10.0, 10.0], [11.0, 10.0], [10.0, 12.0]]);
        let ds = Dataset::from_rows(&rows).unwrap();
        let g = build_knn_graph(&ds, 3).unwrap();
        let (k0, geo) = mean_curvature_at(0, &ds, &g).unwrap();
        assert_eq!(k0, 0.0);
        assert!(geo.degenerate);
    }

    #[test]
    fn collinear_points_match_hand_oracle() {
        // points on y = 2x; Σ is rank one along (1, 2)/√5
        let rows: Vec<[f64; 2]> = (0..12).map(|i| [i as f64 * 0.5, i as f64]).collect();
        let ds = Dataset::from_rows(&rows).unwrap();
        let g = build_knn_graph(&ds, 4).unwrap();
        let i = 6;
        let (k_i, geo) = mean_curvature_at(i, &ds, &g).unwrap();
        // hand oracle: with u1 = (1,2)/√5, u2 = (2,-1)/√5 the quadratic block is
        // rows [1/5, 4/5, 2/5] and [4/5, 1/5, -2/5] (up to sign of the cross
        // column) and Σ = s (1,2)(1,2)ᵀ / 5 with s = mean squared offset
        let s: f64 = g.distances[i].iter().map(|d| d * d).sum::<f64>() / 4.0;
        let hh = [
            [
                1.0 / 25.0 + 16.0 / 25.0 + 4.0 / 25.0,
                4.0 / 25.0 + 4.0 / 25.0 - 4.0 / 25.0,
            ],
            [
                4.0 / 25.0 + 4.0 / 25.0 - 4.0 / 25.0,
                16.0 / 25.0 + 1.0 / 25.0 + 4.0 / 25.0,
            ],
        ];
        let sigma = [[s / 5.0, 2.0 * s / 5.0], [2.0 * s / 5.0, 4.0 * s / 5.0]];
        let mut expected = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                expected += hh[r][c] * sigma[c][r];
            }
        }
        assert!((k_i - expected).abs() < 1e-8, "{k_i} vs {expected}");
        assert!(!geo.degenerate);
        // fast path agrees
        let (fast, _) = score_point(i, &ds, &g).unwrap();
        assert!((fast - k_i).abs() < 1e-12);
    }

    #[test]
    fn cyclic_trace_and_geometry_consistency() {
        let ds = gen_blobs(60, &[vec![0.0, 0.0, 0.0]], &[1.0], 12).unwrap();
        let g = build_knn_graph(&ds, 6).unwrap();
        for i in 0..ds.n() {
            let (k_i, geo) = mean_curvature_at(i, &ds, &g).unwrap();
            let other = geo.covariance.matmul(&geo.hessian).unwrap().trace();
            assert!((k_i - other).abs() <= 1e-9 * k_i.abs().max(1e-300));
            assert!((k_i - geo.shape_operator.trace()).abs() == 0.0);
            let (fast, _) = score_point(i, &ds, &g).unwrap();
            assert!((fast - k_i).abs() <= 1e-12 * k_i.abs());
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_scores(&[1.0, 2.0, 3.0]).unwrap(),
            (vec![0.0, 0.5, 1.0], false)
        );
        assert_eq!(normalize_scores(&[5.0; 3]).unwrap(), (vec![0.0; 3], true));
        assert!(normalize_scores(&[]).is_err());
    }

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile_threshold(&[0.0, 1.0], 0.5).unwrap(), 0.5);
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        assert!((percentile_threshold(&grid, 0.8).unwrap() - 0.8).abs() < 1e-15);
        assert!(percentile_threshold(&grid, 0.0).is_err());
        assert!(percentile_threshold(&grid, 1.0).is_err());
        assert!(percentile_threshold(&[], 0.5).is_err());
    }

    #[test]
    fn percentile_matches_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let scores: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        let mut s = scores.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // rank 0.75 * 49 = 36.75
        let expected = s[36] + 0.75 * (s[37] - s[36]);
        assert!((percentile_threshold(&scores, 0.75).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn constant_dataset_flags_nothing() {
        let ds = Dataset::from_rows(&[[1.0, 1.0]; 10]).unwrap();
        let report = mcbp(&ds, 3, 0.8).unwrap();
        assert!(report.degenerate_scores);
        assert_eq!(report.boundary_count(), 0);
        assert!(report.raw_scores.iter().all(|&k| k == 0.0));
        assert_eq!(report.degenerate_patches.len(), 10);
        assert!(report
            .normalized_scores
            .iter()
            .zip(&report.boundary_flags)
            .all(|(&s, &b)| (s >= report.threshold) == b));
    }

    #[test]
    fn mcbp_parameter_errors() {
        let ds = gen_blobs(10, &[vec![0.0, 0.0]], &[1.0], 1).unwrap();
        assert!(mcbp(&ds, 1, 0.5).is_err());
        assert!(mcbp(&ds, 3, 1.5).is_err());
        assert!(matches!(mcbp(&ds, 9, 0.5), Err(Error::DatasetTooSmall { .. })));
    }

    #[test]
    fn report_serialization() {
        let ds = gen_blobs(20, &[vec![0.0, 0.0]], &[1.0], 2).unwrap();
        let r = mcbp(&ds, 4, 0.75).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,raw_K,norm_K,boundary\n"));
        assert_eq!(text.lines().count(), 21);
        let back: CurvatureReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn sparse_blob_scores_higher() {
        let ds = gen_blobs(200, &[vec![0.0, 0.0], vec![12.0, 0.0]], &[0.5, 2.0], 31).unwrap();
        let report = mcbp(&ds, 7, 0.75).unwrap();
        let labels = ds.labels().unwrap();
        let mean = |c: usize| {
            let v: Vec<f64> = (0..200)
                .filter(|&i| labels[i] == c)
                .map(|i| report.raw_scores[i])
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(1) > mean(0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn report_invariants(seed in 0u64..1000, n in 12usize..80, p in 0.05f64..0.95) {
            let ds = gen_blobs(n, &[vec![0.0, 0.0], vec![3.0, 1.0]], &[1.0, 0.6], seed).unwrap();
            let report = mcbp(&ds, 5, p).unwrap();
            let norm = &report.normalized_scores;
            prop_assert!(norm.iter().all(|&s| (0.0..=1.0).contains(&s)));
            prop_assert_eq!(norm.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
            prop_assert_eq!(norm.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
            for (s, b) in norm.iter().zip(&report.boundary_flags) {
                prop_assert_eq!(*s >= report.threshold, *b);
            }
            // with distinct scores the flagged count is n - ceil(p (n-1)) or one more
            let count = report.boundary_count() as f64;
            let nf = n as f64;
            prop_assert!(count >= (1.0 - p) * nf - 1.0 && count <= (1.0 - p) * nf + 1.0 + 1.0);

            // thresholding raw scores at the same percentile flags the same set
            let t_raw = percentile_threshold(&report.raw_scores, p).unwrap();
            let raw_flags: Vec<bool> = report.raw_scores.iter().map(|&k| k >= t_raw).collect();
            prop_assert_eq!(raw_flags, report.boundary_flags.clone());
        }
    }
}
