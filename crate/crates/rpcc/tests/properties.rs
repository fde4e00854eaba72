//! Randomized invariants across the library surface.

use std::fs;

use ndarray::Array2;
use proptest::collection::vec;
use proptest::prelude::*;

use rpcc::bounds::{epsilon_thresholds_logn, gamma_bounds};
use rpcc::dataset::{load_csv, save_csv, DataMatrix, Partition};
use rpcc::metrics::{accuracy, adjusted_rand_index, rand_index};
use rpcc::path::expand_grid;
use rpcc::projection::embedding_dim_logn;
use rpcc::weights::{check_assumption2, knn_gaussian_weights, uniform_weights};

fn labels(n: usize) -> impl Strategy<Value = Vec<usize>> {
    vec(1..=4usize, n..=n)
}

fn small_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=8usize, 1..=4usize).prop_flat_map(|(n, d)| {
        vec(vec(-100.0..100.0f64, d..=d), n..=n)
    })
}

fn to_data(rows: &[Vec<f64>]) -> DataMatrix {
    let n = rows.len();
    let d = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    DataMatrix::new(Array2::from_shape_vec((n, d), flat).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_identity(rows in small_matrix(), with_labels in any::<bool>()) {
        let data = to_data(&rows);
        let raw: Vec<usize> = (0..data.n()).map(|i| i % 3).collect();
        let part = Partition::from_raw(&raw).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("prop.csv");
        let labels_opt = with_labels.then_some(&part);
        save_csv(&data, labels_opt, &path).unwrap();
        let (back, back_labels) = load_csv(&path, with_labels).unwrap();
        prop_assert_eq!(back.values(), data.values());
        if with_labels {
            let got = back_labels.unwrap();
            prop_assert_eq!(got.labels(), part.labels());
        }
        fs::remove_file(&path).ok();
    }

    #[test]
    fn metrics_ignore_relabeling(raw in labels(8), perm_seed in 0..24usize) {
        let p1 = Partition::from_raw(&raw).unwrap();
        // Relabel through a permutation of label ids.
        let perms = [
            [1usize, 2, 3, 4], [2, 1, 3, 4], [3, 1, 2, 4], [4, 3, 2, 1],
            [2, 3, 4, 1], [1, 3, 2, 4],
        ];
        let perm = perms[perm_seed % perms.len()];
        let relabeled: Vec<usize> = raw.iter().map(|&l| perm[l - 1]).collect();
        let p2 = Partition::from_raw(&relabeled).unwrap();
        prop_assert_eq!(rand_index(&p1, &p2).unwrap(), 1.0);
        prop_assert_eq!(adjusted_rand_index(&p1, &p2).unwrap(), 1.0);
        prop_assert_eq!(accuracy(&p1, &p2).unwrap(), 1.0);
    }

    #[test]
    fn metrics_are_symmetric(a in labels(7), b in labels(7)) {
        let pa = Partition::from_raw(&a).unwrap();
        let pb = Partition::from_raw(&b).unwrap();
        prop_assert_eq!(
            rand_index(&pa, &pb).unwrap(),
            rand_index(&pb, &pa).unwrap()
        );
        prop_assert_eq!(
            adjusted_rand_index(&pa, &pb).unwrap(),
            adjusted_rand_index(&pb, &pa).unwrap()
        );
    }

    #[test]
    fn knn_weights_are_symmetric_and_complete(rows in small_matrix(), k in 1..=3usize) {
        let data = to_data(&rows);
        prop_assume!(k < data.n());
        let graph = knn_gaussian_weights(&data, k, 0.05).unwrap();
        for i in 0..data.n() {
            for j in 0..data.n() {
                prop_assert_eq!(graph.weight(i, j), graph.weight(j, i));
            }
            // The k nearest neighbors of every point are present.
            let mut cand: Vec<(f64, usize)> = (0..data.n())
                .filter(|&j| j != i)
                .map(|j| (data.sq_dist(i, j), j))
                .collect();
            cand.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (_, j) in cand.into_iter().take(k) {
                prop_assert!(graph.has_edge(i, j));
            }
        }
    }

    #[test]
    fn uniform_margin_is_smallest_cluster(sizes in vec(2..=5usize, 2..=4)) {
        let n: usize = sizes.iter().sum();
        let mut raw = Vec::new();
        for (c, &s) in sizes.iter().enumerate() {
            raw.extend(std::iter::repeat(c + 1).take(s));
        }
        let truth = Partition::from_raw(&raw).unwrap();
        let graph = uniform_weights(n).unwrap();
        let report = check_assumption2(&graph, &truth);
        prop_assert!(report.holds);
        let min_size = *sizes.iter().min().unwrap() as f64;
        prop_assert!((report.margin - min_size).abs() < 1e-12);
    }

    #[test]
    fn embedding_dim_monotone_in_all_arguments(
        e1 in 0.05..0.9f64,
        delta in 0.01..0.09f64,
        n in 2..5000usize,
        c in 0.5..20.0f64,
    ) {
        let e2 = e1 + delta;
        let m1 = embedding_dim_logn(e1, n, c).unwrap();
        let m2 = embedding_dim_logn(e2, n, c).unwrap();
        prop_assert!(m2 <= m1, "larger distortion needs no more dimensions");
        let m3 = embedding_dim_logn(e1, n + 100, c).unwrap();
        prop_assert!(m3 >= m1, "more points need no fewer dimensions");
        let m4 = embedding_dim_logn(e1, n, c + 1.0).unwrap();
        prop_assert!(m4 >= m1, "a larger constant needs no fewer dimensions");
    }

    #[test]
    fn grid_expansion_hits_both_ends(start in 1.0..20.0f64, steps in 1..60usize) {
        let step = -0.2f64;
        let end = start + step * steps as f64;
        prop_assume!(end > 0.0);
        let grid = expand_grid(start, step, end).unwrap();
        prop_assert_eq!(grid.len(), steps + 1);
        prop_assert!((grid[0] - start).abs() < 1e-12);
        prop_assert!((grid[steps] - end).abs() < 1e-9);
    }

    #[test]
    fn recovery_quantities_ignore_data_scale(scale in 0.1..50.0f64, seed in 0..20u64) {
        // Scaling the data (with unchanged weights) scales the gammas and
        // leaves the ratios and distortion thresholds alone.
        let spec = rpcc::dataset::MixtureSpec::balanced_basis(6, 2, 0.05, 10, seed);
        let (data, truth) = rpcc::dataset::generate_mixture(&spec).unwrap();
        let graph = uniform_weights(10).unwrap();
        let gb = gamma_bounds(&data, &graph, &truth).unwrap();
        let scaled = DataMatrix::new(data.values() * scale).unwrap();
        let gs = gamma_bounds(&scaled, &graph, &truth).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        prop_assert!(rel(gs.gamma_min, scale * gb.gamma_min) < 1e-10);
        prop_assert!(rel(gs.gamma_max, scale * gb.gamma_max) < 1e-10);
        prop_assert!(rel(gs.r, gb.r) < 1e-10);
        let t1 = epsilon_thresholds_logn(gb.r, None, 6, 10, 2.0).unwrap();
        let t2 = epsilon_thresholds_logn(gs.r, None, 6, 10, 2.0).unwrap();
        prop_assert!(rel(t1.eps_sup, t2.eps_sup) < 1e-10);
    }
}
