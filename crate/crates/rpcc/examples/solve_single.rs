//! Solve one convex clustering instance and read the partition off the
//! fused solution.

use rpcc::dataset::{generate_mixture, MixtureSpec};
use rpcc::solver::{extract_partition, objective_value, solve, ProblemInstance, SolverSettings};
use rpcc::weights::{default_phi, knn_gaussian_weights};

fn main() {
    let spec = MixtureSpec::balanced_basis(40, 3, 0.01, 45, 5);
    let (data, truth) = generate_mixture(&spec).unwrap();
    let graph = knn_gaussian_weights(&data, 6, default_phi(&data)).unwrap();
    let settings = SolverSettings::default();

    for gamma in [0.0, 0.5, 3.0] {
        let inst = ProblemInstance::new(&data, &graph, gamma).unwrap();
        let res = solve(&inst, &settings).unwrap();
        let part = extract_partition(&res);
        println!(
            "gamma = {gamma}: {} clusters, objective {:.6}, duality gap {:.2e}, \
             {} iterations, {} fused edges",
            part.k(),
            res.primal_obj,
            res.rel_gap,
            res.iterations,
            res.fused_edges.len()
        );
        // The certificate: a feasible dual matching the primal objective.
        let obj = objective_value(&inst, &res.x).unwrap();
        assert!((obj - res.primal_obj).abs() < 1e-9);
        assert!(res.primal_obj >= res.dual_obj - 1e-9);
        if part.k() == truth.k() {
            println!("  recovered the hidden partition: {}", part.same_clustering(&truth));
        }
    }
}
