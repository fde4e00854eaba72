//! Build the three fusion-weight graphs and check the in-cluster weight
//! condition that the recovery bounds need.

use rpcc::dataset::{generate_mixture, MixtureSpec};
use rpcc::weights::{
    check_assumption2, default_phi, knn_gaussian_weights, oracle_experiment_graph,
    uniform_weights,
};

fn main() {
    let spec = MixtureSpec::balanced_basis(30, 3, 0.01, 60, 7);
    let (data, truth) = generate_mixture(&spec).unwrap();
    let phi = default_phi(&data);
    println!("n = {}, d = {}, phi = 1/d = {phi}", data.n(), data.d());

    let knn = knn_gaussian_weights(&data, 5, phi).unwrap();
    let uniform = uniform_weights(data.n()).unwrap();
    let oracle = oracle_experiment_graph(&data, &truth, 5, phi).unwrap();
    println!("5-NN graph: {} edges", knn.edge_count());
    println!("uniform graph: {} edges", uniform.edge_count());
    println!(
        "oracle graph (5-NN + within-cluster cliques): {} edges",
        oracle.edge_count()
    );

    for (name, graph) in [("5-NN", &knn), ("uniform", &uniform), ("oracle", &oracle)] {
        let report = check_assumption2(graph, &truth);
        println!(
            "{name:>8}: weight condition holds = {} (margin {:.4}, worst pair {:?})",
            report.holds, report.margin, report.worst_pair
        );
    }

    // The kernel weight decays with distance; compare a within-cluster pair
    // with a cross-cluster one.
    let idx = truth.cluster_indices();
    let (i, j) = (idx[0][0], idx[0][1]);
    let (p, q) = (idx[0][0], idx[1][0]);
    println!(
        "kernel weight within cluster: {:.4}, across clusters: {:.4}",
        (-phi * data.sq_dist(i, j)).exp(),
        (-phi * data.sq_dist(p, q)).exp()
    );
}
