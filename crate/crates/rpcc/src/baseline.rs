//! Lloyd's K-means with D^2 seeding and best-of-replicates selection, as
//! the comparison baseline for the projected clustering experiments.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataMatrix, Partition};
use crate::error::{Error, Result};
use crate::projection::ProjectionMatrix;

/// K-means settings. Defaults mirror the experiment protocol: many Lloyd
/// iterations, 30 replicates, best inertia wins.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iter: 10_000,
            replicates: 30,
            seed: 0,
        }
    }
}

fn replicate_seed(base: u64, replicate: usize) -> u64 {
    base.wrapping_add((replicate as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Best-of-replicates Lloyd's K-means. Each replicate draws its own D^2
/// seeding from a seed derived from `cfg.seed`, so a longer replicate
/// stream extends a shorter one. Returns the lowest within-cluster sum of
/// squares and its partition.
pub fn kmeans(data: &DataMatrix, cfg: &KMeansConfig) -> Result<(Partition, f64)> {
    if cfg.k == 0 {
        return Err(Error::Parameter("K must be >= 1".into()));
    }
    if cfg.k > data.n() {
        return Err(Error::Parameter(format!(
            "K = {} exceeds the number of points {}",
            cfg.k,
            data.n()
        )));
    }
    if cfg.replicates == 0 {
        return Err(Error::Parameter("replicates must be >= 1".into()));
    }
    let runs: Vec<(Vec<usize>, f64)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let (assign, inertia, _) =
                lloyd_single(data, cfg.k, cfg.max_iter, replicate_seed(cfg.seed, r));
            (assign, inertia)
        })
        .collect();
    let (best_assign, best_inertia) = runs
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let labels: Vec<usize> = best_assign.iter().map(|&c| c + 1).collect();
    Ok((Partition::from_raw(&labels)?, best_inertia))
}

/// K-means on the embedded data `(Pi a_i)_i`; the partition is over the
/// original point indices.
pub fn rp_kmeans(
    data: &DataMatrix,
    pi: &ProjectionMatrix,
    cfg: &KMeansConfig,
) -> Result<(Partition, f64)> {
    let embedded = pi.project_data(data)?;
    kmeans(&embedded, cfg)
}

/// One replicate: D^2 seeding then Lloyd iterations until assignments are
/// stable or `max_iter` is hit. Returns assignments, final inertia, and the
/// per-iteration inertia history.
pub(crate) fn lloyd_single(
    data: &DataMatrix,
    k: usize,
    max_iter: usize,
    seed: u64,
) -> (Vec<usize>, f64, Vec<f64>) {
    let n = data.n();
    let d = data.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_dsquared(data, k, &mut rng);
    let mut assign = vec![0usize; n];
    let mut history = Vec::new();
    for _ in 0..max_iter {
        // Assignment step; ties go to the lower centroid index.
        let mut changed = false;
        let mut inertia = 0.0;
        for i in 0..n {
            let (mut best_c, mut best_d) = (0usize, f64::INFINITY);
            for (c, cent) in centroids.rows().into_iter().enumerate() {
                let dist: f64 = data
                    .row(i)
                    .iter()
                    .zip(cent.iter())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if dist < best_d {
                    best_d = dist;
                    best_c = c;
                }
            }
            if assign[i] != best_c {
                assign[i] = best_c;
                changed = true;
            }
            inertia += best_d;
        }
        history.push(inertia);
        if !changed && history.len() > 1 {
            break;
        }
        // Update step.
        let mut counts = vec![0usize; k];
        centroids.fill(0.0);
        for i in 0..n {
            counts[assign[i]] += 1;
            let mut row = centroids.row_mut(assign[i]);
            for (v, x) in row.iter_mut().zip(data.row(i).iter()) {
                *v += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                centroids.row_mut(c).mapv_inplace(|v| v * inv);
            }
        }
        repair_empty_clusters(data, &mut assign, &mut counts, &mut centroids);
        let _ = d;
    }
    // An exit at max_iter can land right after an assignment pass that
    // emptied a cluster; the contract is exactly K non-empty clusters.
    let mut counts = vec![0usize; k];
    for &c in &assign {
        counts[c] += 1;
    }
    if counts.iter().any(|&c| c == 0) {
        repair_empty_clusters(data, &mut assign, &mut counts, &mut centroids);
    }
    let inertia = *history.last().unwrap_or(&0.0);
    (assign, inertia, history)
}

/// Reseed each empty cluster to the point farthest from its centroid,
/// stolen from a cluster that can spare it.
fn repair_empty_clusters(
    data: &DataMatrix,
    assign: &mut [usize],
    counts: &mut [usize],
    centroids: &mut Array2<f64>,
) {
    let n = data.n();
    for c in 0..counts.len() {
        if counts[c] == 0 {
            let mut far_i = usize::MAX;
            let mut far_d = -1.0;
            for i in 0..n {
                if counts[assign[i]] <= 1 {
                    continue;
                }
                let dist: f64 = data
                    .row(i)
                    .iter()
                    .zip(centroids.row(assign[i]).iter())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if dist > far_d {
                    far_d = dist;
                    far_i = i;
                }
            }
            if far_i != usize::MAX {
                counts[assign[far_i]] -= 1;
                counts[c] = 1;
                assign[far_i] = c;
                let point = data.row(far_i).to_owned();
                centroids.row_mut(c).assign(&point);
            }
        }
    }
}

/// D^2 (k-means++) seeding: first centroid uniform, each next one drawn
/// with probability proportional to the squared distance to the nearest
/// chosen centroid.
fn seed_dsquared(data: &DataMatrix, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = data.n();
    let d = data.d();
    let mut centroids = Array2::zeros((k, d));
    let first = rng.gen_range(0..n);
    centroids.row_mut(0).assign(&data.row(first));
    let mut dist_sq: Vec<f64> = (0..n)
        .map(|i| {
            data.row(i)
                .iter()
                .zip(data.row(first).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum()
        })
        .collect();
    for c in 1..k {
        let total: f64 = dist_sq.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in dist_sq.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.row_mut(c).assign(&data.row(pick));
        for i in 0..n {
            let dist: f64 = data
                .row(i)
                .iter()
                .zip(centroids.row(c).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if dist < dist_sq[i] {
                dist_sq[i] = dist;
            }
        }
    }
    centroids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::Family;
    use ndarray::arr2;

    fn matrix(rows: &[&[f64]]) -> DataMatrix {
        let n = rows.len();
        let d = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        DataMatrix::new(Array2::from_shape_vec((n, d), flat).unwrap()).unwrap()
    }

    #[test]
    fn distinct_points_become_singletons() {
        let data = matrix(&[&[0.0, 0.0], &[5.0, 0.0], &[0.0, 5.0]]);
        let (part, inertia) = kmeans(&data, &KMeansConfig::new(3)).unwrap();
        assert_eq!(part.k(), 3);
        assert_eq!(inertia, 0.0);
    }

    #[test]
    fn single_cluster_inertia_is_variance_around_mean() {
        let data = matrix(&[&[0.0], &[1.0], &[2.0], &[7.0]]);
        let (part, inertia) = kmeans(&data, &KMeansConfig::new(1)).unwrap();
        assert_eq!(part.k(), 1);
        let mean = data.grand_mean()[0];
        let expect: f64 = (0..4).map(|i| (data.values()[[i, 0]] - mean).powi(2)).sum();
        assert!((inertia - expect).abs() < 1e-12);
    }

    #[test]
    fn well_separated_two_clusters() {
        let data = matrix(&[&[0.0], &[0.1], &[10.0], &[10.1]]);
        let (part, inertia) = kmeans(&data, &KMeansConfig::new(2)).unwrap();
        let want = Partition::new(vec![1, 1, 2, 2]).unwrap();
        assert!(part.same_clustering(&want));
        assert!((inertia - 0.01).abs() < 1e-12);
    }

    #[test]
    fn inertia_never_increases_within_a_replicate() {
        let data = matrix(&[
            &[0.0, 0.3],
            &[0.5, 0.0],
            &[3.0, 3.2],
            &[3.3, 2.9],
            &[6.0, 0.1],
            &[6.2, 0.4],
            &[1.0, 1.0],
            &[4.0, 4.0],
        ]);
        for seed in 0..20u64 {
            let (_, _, history) = lloyd_single(&data, 3, 100, seed);
            for w in history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "inertia rose: {:?}", w);
            }
        }
    }

    #[test]
    fn more_replicates_never_hurt() {
        let data = matrix(&[
            &[0.0, 0.0],
            &[0.2, 0.1],
            &[5.0, 5.0],
            &[5.1, 5.2],
            &[9.0, 1.0],
            &[9.2, 0.8],
            &[2.0, 7.0],
        ]);
        let mut prev = f64::INFINITY;
        for reps in 1..=6 {
            let mut cfg = KMeansConfig::new(3);
            cfg.replicates = reps;
            cfg.seed = 12;
            let (_, inertia) = kmeans(&data, &cfg).unwrap();
            assert!(inertia <= prev + 1e-12);
            prev = inertia;
        }
    }

    #[test]
    fn output_has_exactly_k_clusters() {
        // Duplicated points tempt empty clusters; the repair keeps K.
        let data = matrix(&[&[0.0], &[0.0], &[0.0], &[1.0], &[1.0], &[10.0]]);
        let mut cfg = KMeansConfig::new(3);
        cfg.seed = 5;
        let (part, _) = kmeans(&data, &cfg).unwrap();
        assert_eq!(part.k(), 3);
        assert!(part.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn truncated_runs_still_fill_every_cluster() {
        // Even a single Lloyd iteration on duplicate-heavy data must hand
        // back K non-empty clusters.
        let data = matrix(&[&[0.0], &[0.0], &[0.0], &[0.0], &[1.0], &[1.0]]);
        for seed in 0..50u64 {
            let (assign, _, _) = lloyd_single(&data, 3, 1, seed);
            let mut counts = [0usize; 3];
            for &c in &assign {
                counts[c] += 1;
            }
            assert!(counts.iter().all(|&c| c > 0), "seed {seed}: {counts:?}");
        }
    }

    #[test]
    fn k_larger_than_n_is_rejected() {
        let data = matrix(&[&[0.0], &[1.0]]);
        assert!(kmeans(&data, &KMeansConfig::new(3)).is_err());
        assert!(kmeans(&data, &KMeansConfig::new(0)).is_err());
    }

    #[test]
    fn identity_projection_reproduces_kmeans() {
        let data = matrix(&[&[0.0, 0.1], &[0.2, 0.0], &[7.0, 7.0], &[7.1, 6.9]]);
        let eye = Array2::from_shape_fn((2, 2), |(i, j)| if i == j { 1.0 } else { 0.0 });
        let pi = ProjectionMatrix::from_matrix(eye, Family::Gaussian, 0).unwrap();
        let cfg = KMeansConfig::new(2);
        let (p1, i1) = kmeans(&data, &cfg).unwrap();
        let (p2, i2) = rp_kmeans(&data, &pi, &cfg).unwrap();
        assert!(p1.same_clustering(&p2));
        assert!((i1 - i2).abs() < 1e-12);
    }

    #[test]
    fn projection_dimension_mismatch_errors() {
        let data = matrix(&[&[0.0, 0.1], &[1.0, 0.9]]);
        let pi = crate::projection::sample_projection(1, 3, Family::Gaussian, 0).unwrap();
        assert!(rp_kmeans(&data, &pi, &KMeansConfig::new(2)).is_err());
        let _ = arr2(&[[0.0]]);
    }
}
