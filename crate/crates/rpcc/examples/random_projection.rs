//! Embedding dimensions, projection sampling, and empirical distortion
//! checks on the difference sets that drive cluster recovery.

use rpcc::dataset::{generate_mixture, MixtureSpec};
use rpcc::projection::{
    build_difference_sets, check_singular_bounds, conditional_recovery_probability,
    embedding_dim_logk, embedding_dim_logn, sample_projection, singular_bounds,
    union_bound_probability, verify_isometry, Family, SubgaussianProfile,
};

fn main() {
    // The dimension formulas at a few distortions.
    println!("embedding dimensions for n = 1000, C = 9:");
    for eps in [0.2, 0.4, 0.6, 0.8, 0.95] {
        println!(
            "  eps = {eps:<4}  m = {}",
            embedding_dim_logn(eps, 1000, 9.0).unwrap()
        );
    }
    println!(
        "cluster-count variant, K = 10, C = 10: m = {} at eps = 0.70, {} at eps = 0.85",
        embedding_dim_logk(0.70, 10, 10.0).unwrap(),
        embedding_dim_logk(0.85, 10, 10.0).unwrap()
    );

    // Distortion verification on a concrete instance.
    let spec = MixtureSpec::balanced_basis(120, 4, 0.01, 80, 3);
    let (data, truth) = generate_mixture(&spec).unwrap();
    let ds = build_difference_sets(&data, &truth).unwrap();
    println!(
        "difference sets: N1 = {} within-cluster vectors, N2 = {} centroid vectors",
        ds.n1(),
        ds.n2()
    );
    let eps = 0.3;
    let m = embedding_dim_logn(eps, data.n(), 9.0).unwrap();
    let pi = sample_projection(m, data.d(), Family::Gaussian, 11).unwrap();
    let report = verify_isometry(&pi, &ds.all_diffs(&data), eps).unwrap();
    println!(
        "m = {m}: preserved {}/{} squared norms within eps = {eps} (all: {})",
        report.preserved, report.total, report.all_preserved
    );

    // The closed-form probability bounds behind that check.
    let delta = 1.0 / ((ds.n1() + ds.n2()) as f64).powi(2);
    println!(
        "union bound success probability: {:.6}",
        union_bound_probability(&[ds.n1(), ds.n2()], delta).unwrap()
    );
    let (general, with_n) =
        conditional_recovery_probability(ds.n1(), ds.n2(), 2.0, Some(data.n())).unwrap();
    println!(
        "conditional centroid-preservation bound: {:.6} (count form {:.6})",
        general,
        with_n.unwrap()
    );

    // Singular values of the scaled random matrix against the sub-gaussian
    // envelope.
    let profile = SubgaussianProfile::default();
    let small = sample_projection(32, 100, Family::Gaussian, 5).unwrap();
    let bounds = singular_bounds(32, 100, &profile).unwrap();
    println!(
        "singular envelope for 32x100: [{:.4}, {:.4}], sample inside: {}",
        bounds.lower,
        bounds.upper,
        check_singular_bounds(&small, &profile).unwrap()
    );
}
