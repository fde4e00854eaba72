//! Sweep the fusion strength over a grid and score every point against the
//! hidden partition.

use rpcc::dataset::{generate_mixture, MixtureSpec};
use rpcc::path::{detect_perfect_recovery, parse_grid, sweep};
use rpcc::solver::SolverSettings;
use rpcc::weights::{default_phi, knn_gaussian_weights};

fn main() {
    let spec = MixtureSpec::balanced_basis(60, 4, 0.01, 80, 9);
    let (data, truth) = generate_mixture(&spec).unwrap();
    let graph = knn_gaussian_weights(&data, 8, default_phi(&data)).unwrap();
    let grid = parse_grid("3:-0.25:0.25").unwrap();
    let settings = SolverSettings::default();

    let path = sweep(&data, &graph, &grid, Some(&truth), &settings).unwrap();
    println!("gamma    K  RI      ARI     accuracy  gap");
    for p in &path.points {
        println!(
            "{:<7.3}{:>3}  {:.4}  {:.4}  {:.4}    {:.1e}",
            p.gamma,
            p.k_found,
            p.rand_index.unwrap(),
            p.adjusted_rand_index.unwrap(),
            p.accuracy.unwrap(),
            p.rel_gap
        );
    }
    let report = detect_perfect_recovery(&path, &truth, None);
    println!("gammas recovering the hidden partition: {:?}", report.perfect_gammas);
}
