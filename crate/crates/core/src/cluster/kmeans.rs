use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClusteringResult;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{squared_distance, DenseMatrix};

pub const KMEANS_MAX_ITER: usize = 300;
pub const KMEANS_TOL: f64 = 1e-6;

/// k-means++ seeding: the first center is uniform, each further center is
/// drawn with probability proportional to the squared distance to the
/// nearest center chosen so far.
pub fn kmeans_pp_init(data: &Dataset, c: usize, seed: u64) -> Result<DenseMatrix> {
    let n = data.n();
    if c == 0 || c > n {
        return Err(Error::param(format!("cannot pick {c} centers from {n} points")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(c);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(data.point(i), data.point(first)))
        .collect();

    while chosen.len() < c {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just above the running sum
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // every remaining point coincides with a center
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(data.point(i), data.point(next)));
        }
    }
    Ok(data.features().select_rows(&chosen))
}

fn assign(data: &Dataset, centroids: &DenseMatrix) -> (Vec<usize>, Vec<f64>) {
    (0..data.n())
        .map(|i| {
            let p = data.point(i);
            let mut best = (0, f64::INFINITY);
            for j in 0..centroids.rows() {
                let d = squared_distance(p, centroids.row(j));
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .unzip()
}

/// Centroid of each label; `None` for clusters that received no point.
fn means(data: &Dataset, labels: &[usize], c: usize) -> Vec<Option<Vec<f64>>> {
    let m = data.m();
    let mut sums = vec![vec![0.0; m]; c];
    let mut counts = vec![0usize; c];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, &v) in sums[l].iter_mut().zip(data.point(i)) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, n)| (n > 0).then(|| s.into_iter().map(|v| v / n as f64).collect()))
        .collect()
}

/// Lloyd iterations from the given centers.
///
/// Stops when labels stop changing or the largest centroid move drops below
/// `tol`. A cluster that loses all its points is re-seeded at the point that
/// is farthest from its own centroid. The returned centroids are the means of
/// the returned labels.
pub fn kmeans(data: &Dataset, init: &DenseMatrix, max_iter: usize, tol: f64) -> Result<ClusteringResult> {
    let c = init.rows();
    if c == 0 || c > data.n() {
        return Err(Error::param(format!("cannot fit {c} clusters to {} points", data.n())));
    }
    if init.cols() != data.m() {
        return Err(Error::Dimension {
            expected: (c, data.m()),
            got: init.shape(),
        });
    }
    if max_iter == 0 || tol.is_nan() || tol < 0.0 {
        return Err(Error::param("max_iter must be positive and tol non-negative"));
    }

    let mut centroids = init.clone();
    let (mut labels, mut dists) = assign(data, &centroids);
    let mut inertia: f64 = dists.iter().sum();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let mut next = DenseMatrix::zeros(c, data.m());
        let mut used = vec![false; data.n()];
        for (j, mean) in means(data, &labels, c).into_iter().enumerate() {
            let row = match mean {
                Some(v) => v,
                None => {
                    let far = (0..data.n())
                        .filter(|&i| !used[i])
                        .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                        .expect("c <= n leaves a free point");
                    used[far] = true;
                    data.point(far).to_vec()
                }
            };
            next.row_mut(j).copy_from_slice(&row);
        }
        let shift = (0..c)
            .map(|j| squared_distance(next.row(j), centroids.row(j)).sqrt())
            .fold(0.0, f64::max);
        centroids = next;

        let (new_labels, new_dists) = assign(data, &centroids);
        let new_inertia: f64 = new_dists.iter().sum();
        assert!(
            new_inertia <= inertia * (1.0 + 1e-12) + 1e-12,
            "Lloyd step increased inertia: {inertia} -> {new_inertia}"
        );
        let stable = new_labels == labels;
        labels = new_labels;
        dists = new_dists;
        inertia = new_inertia;
        if stable || shift < tol {
            converged = true;
            break;
        }
    }

    // report centroids consistent with the final labels
    for (j, mean) in means(data, &labels, c).into_iter().enumerate() {
        if let Some(v) = mean {
            centroids.row_mut(j).copy_from_slice(&v);
        }
    }
    let inertia = (0..data.n())
        .map(|i| squared_distance(data.point(i), centroids.row(labels[i])))
        .sum();

    Ok(ClusteringResult {
        labels: labels.into_iter().map(|l| l as i64).collect(),
        centroids: Some(centroids),
        n_clusters: c,
        iterations,
        inertia: Some(inertia),
        converged,
        min_cluster_size: None,
    })
}

/// k-means++ seeding followed by Lloyd iterations with default limits.
pub fn kmeans_pp(data: &Dataset, c: usize, seed: u64) -> Result<ClusteringResult> {
    let init = kmeans_pp_init(data, c, seed)?;
    kmeans(data, &init, KMEANS_MAX_ITER, KMEANS_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_blobs;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> Dataset {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn init_covers_all_points_when_c_is_n() {
        let ds = gen_blobs(12, &[vec![0.0, 0.0]], &[1.0], 3).unwrap();
        let cents = kmeans_pp_init(&ds, 12, 5).unwrap();
        let mut found: Vec<usize> = (0..12)
            .map(|r| (0..12).find(|&i| ds.point(i) == cents.row(r)).unwrap())
            .collect();
        found.sort_unstable();
        assert_eq!(found, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn init_with_duplicates_still_distinct_rows() {
        let ds = line(&[1.0, 1.0, 1.0, 4.0]);
        let cents = kmeans_pp_init(&ds, 4, 0).unwrap();
        assert_eq!(cents.rows(), 4);
        assert!(kmeans_pp_init(&ds, 5, 0).is_err());
        assert!(kmeans_pp_init(&ds, 0, 0).is_err());
    }

    #[test]
    fn single_center_is_a_data_point() {
        let ds = line(&[3.0, 8.0, -1.0]);
        for seed in 0..20 {
            let cent = kmeans_pp_init(&ds, 1, seed).unwrap();
            assert!([3.0, 8.0, -1.0].contains(&cent[(0, 0)]));
        }
    }

    #[test]
    fn far_pairs_get_one_center_each() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [0.1, 0.0], [100.0, 0.0], [100.1, 0.0]]).unwrap();
        let hits = (0..1000u64)
            .filter(|&seed| {
                let c = kmeans_pp_init(&ds, 2, seed).unwrap();
                (c[(0, 0)] < 50.0) != (c[(1, 0)] < 50.0)
            })
            .count();
        assert!(hits >= 950, "{hits}");
    }

    #[test]
    fn hand_example_1d() {
        let ds = line(&[0.0, 1.0, 9.0, 10.0]);
        let init = DenseMatrix::from_rows(&[[0.0], [9.0]]).unwrap();
        let r = kmeans(&ds, &init, 300, 1e-6).unwrap();
        assert_eq!(r.labels, vec![0, 0, 1, 1]);
        let c = r.centroids.unwrap();
        assert_eq!((c[(0, 0)], c[(1, 0)]), (0.5, 9.5));
        assert_eq!(r.inertia, Some(1.0));
    }

    #[test]
    fn fixed_point_converges_immediately() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [5.0, 5.0], [-5.0, 5.0]]).unwrap();
        let init = DenseMatrix::from_rows(&[[0.0, 0.0], [5.0, 5.0], [-5.0, 5.0]]).unwrap();
        let r = kmeans(&ds, &init, 300, 1e-6).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.inertia, Some(0.0));
        assert!(r.converged);
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        // second center starts far from everything and captures nothing
        let ds = line(&[0.0, 1.0, 2.0, 10.0, 11.0]);
        let init = DenseMatrix::from_rows(&[[5.0], [100.0]]).unwrap();
        let r = kmeans(&ds, &init, 300, 1e-6).unwrap();
        let c = r.centroids.unwrap();
        let mut cs = [c[(0, 0)], c[(1, 0)]];
        cs.sort_by(f64::total_cmp);
        assert_eq!(cs, [1.0, 10.5]);
    }

    #[test]
    fn dimension_checks() {
        let ds = line(&[0.0, 1.0]);
        assert!(kmeans(&ds, &DenseMatrix::zeros(1, 2), 10, 1e-6).is_err());
        assert!(kmeans(&ds, &DenseMatrix::zeros(3, 1), 10, 1e-6).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn centroids_are_label_means(seed in 0u64..500, c in 1usize..5) {
            let ds = gen_blobs(60, &[vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 4.0]], &[1.0, 1.0, 1.0], seed).unwrap();
            let r = kmeans_pp(&ds, c, seed).unwrap();
            let cents = r.centroids.unwrap();
            for j in 0..c {
                let members: Vec<usize> = (0..60).filter(|&i| r.labels[i] == j as i64).collect();
                prop_assume!(!members.is_empty());
                for d in 0..2 {
                    let mean = members.iter().map(|&i| ds.point(i)[d]).sum::<f64>() / members.len() as f64;
                    prop_assert!((mean - cents[(j, d)]).abs() < 1e-9);
                }
            }
            // deterministic under the seed
            prop_assert_eq!(kmeans_pp(&ds, c, seed).unwrap().labels, r.labels);
        }
    }
}
