//! Projected convex clustering against projected K-means on a shared
//! projection, on an unbalanced instance where K-means struggles.

use rpcc::baseline::{kmeans, rp_kmeans, KMeansConfig};
use rpcc::dataset::{basis_means, generate_mixture, MixtureSpec};
use rpcc::metrics::adjusted_rand_index;
use rpcc::path::expand_grid;
use rpcc::projection::{sample_projection, Family};
use rpcc::solver::{extract_partition, EdgeSplitSolver, SolverSettings, TauMerge};
use rpcc::weights::{default_phi, knn_gaussian_weights};

fn main() {
    // Three large clusters and five small ones.
    let counts = [60usize, 60, 60, 8, 8, 8, 8, 8];
    let n: usize = counts.iter().sum();
    let k = counts.len();
    let spec = MixtureSpec {
        d: 100,
        k,
        means: basis_means(100, k),
        variances: vec![0.005; k],
        mix_weights: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        n,
        seed: 12,
    };
    let (data, truth) = generate_mixture(&spec).unwrap();
    let graph = knn_gaussian_weights(&data, 4, default_phi(&data)).unwrap();
    let grid = expand_grid(10.0, -0.5, 1.0).unwrap();
    let settings = SolverSettings {
        rho: 5.0,
        tau_merge: TauMerge::MedianScale(1e-5),
        ..SolverSettings::default()
    };

    let full_cfg = KMeansConfig::new(k);
    let (full_part, _) = kmeans(&data, &full_cfg).unwrap();
    println!(
        "K-means on the original data: ARI = {:.4}",
        adjusted_rand_index(&full_part, &truth).unwrap()
    );

    println!("m   model       ARI");
    for m in [5usize, 10, 25] {
        let pi = sample_projection(m, data.d(), Family::Gaussian, 90 + m as u64).unwrap();
        let embedded = pi.project_data(&data).unwrap();

        // Projected convex clustering: best point on a short path.
        let mut solver = EdgeSplitSolver::new(&embedded, &graph, &settings).unwrap();
        let mut best = -1.0f64;
        for &g in &grid {
            let res = solver.solve_gamma(g, true).unwrap();
            let part = extract_partition(&res);
            best = best.max(adjusted_rand_index(&part, &truth).unwrap());
        }
        println!("{m:<3} clustering  {best:.4}");

        // Projected K-means on the same projection.
        let mut cfg = KMeansConfig::new(k);
        cfg.seed = 90 + m as u64;
        let (kpart, _) = rp_kmeans(&data, &pi, &cfg).unwrap();
        println!(
            "{m:<3} {k}-means     {:.4}",
            adjusted_rand_index(&kpart, &truth).unwrap()
        );
    }
}
