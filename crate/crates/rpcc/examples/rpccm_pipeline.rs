//! The whole projected-clustering protocol at desk scale: generate, weight,
//! bound, project, sweep, and check that the embedded model recovers the
//! hidden partition inside the certified interval.

use rpcc::bounds::{gamma_bounds, recovery_interval_logn, IntervalKind};
use rpcc::dataset::{generate_mixture, MixtureSpec};
use rpcc::path::{detect_perfect_recovery, expand_grid, sweep};
use rpcc::projection::{
    build_difference_sets, embedding_dim_logn, sample_projection, verify_isometry, Family,
};
use rpcc::solver::SolverSettings;
use rpcc::weights::{default_phi, oracle_experiment_graph};

fn main() {
    // 1. Data with a hidden partition.
    let spec = MixtureSpec::balanced_basis(150, 4, 0.03, 120, 31);
    let (data, truth) = generate_mixture(&spec).unwrap();
    println!("data: n = {}, d = {}, K = {}", data.n(), data.d(), truth.k());

    // 2. Weights on the original data; both models share them.
    let graph = oracle_experiment_graph(&data, &truth, 8, default_phi(&data)).unwrap();

    // 3. Recovery bounds on the original data.
    let gb = gamma_bounds(&data, &graph, &truth).unwrap();
    println!(
        "original interval [gamma_min, gamma_max) = [{:.4}, {:.4}), r = {:.2}",
        gb.gamma_min, gb.gamma_max, gb.r
    );

    // 4. A random projection with a verified distortion.
    let eps = 0.6;
    let m = embedding_dim_logn(eps, data.n(), 9.0).unwrap();
    let pi = sample_projection(m, data.d(), Family::Gaussian, 77).unwrap();
    let ds = build_difference_sets(&data, &truth).unwrap();
    let isometry = verify_isometry(&pi, &ds.all_diffs(&data), eps).unwrap();
    println!(
        "projection to m = {m}: {}/{} difference norms preserved at eps = {eps}",
        isometry.preserved, isometry.total
    );

    // 5. The certified interval for the embedded model.
    let interval = recovery_interval_logn(&gb, eps, IntervalKind::PerfectRecovery).unwrap();
    println!(
        "certified embedded interval: [{:.4}, {:.4}) nonempty = {}",
        interval.lo, interval.hi, interval.nonempty
    );

    // 6. Sweep the embedded model and check recovery inside the interval.
    let embedded = pi.project_data(&data).unwrap();
    let grid = expand_grid(0.6, -0.025, 0.025).unwrap();
    let settings = SolverSettings::default();
    let path = sweep(&embedded, &graph, &grid, Some(&truth), &settings).unwrap();
    let report = detect_perfect_recovery(&path, &truth, Some(&interval));
    println!(
        "recovering gammas on the grid: {} of {}",
        report.perfect_gammas.len(),
        path.points.len()
    );
    if let Some(iv) = report.interval {
        println!(
            "inside the certified interval: {}/{} grid points recover (vacuous: {})",
            iv.inside_perfect, iv.inside_count, iv.vacuous
        );
    }
}
