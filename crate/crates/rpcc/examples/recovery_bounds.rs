//! The full recovery-bound calculus on a synthetic instance: gamma bounds,
//! distortion thresholds, and the intervals they certify.

use rpcc::bounds::{
    check_assumption3, epsilon_thresholds_logk, epsilon_thresholds_logn, gamma_bounds,
    hat_gamma_bounds, recovery_interval_logk, recovery_interval_logn, IntervalKind,
};
use rpcc::dataset::{generate_mixture, MixtureSpec};
use rpcc::projection::{embedding_dim_logn, sample_projection, Family, SubgaussianProfile};
use rpcc::weights::{default_phi, oracle_experiment_graph};

fn main() {
    // Noisy enough that the k-NN part of the graph crosses clusters, so
    // every bound is finite.
    let spec = MixtureSpec::balanced_basis(150, 4, 0.03, 120, 31);
    let (data, truth) = generate_mixture(&spec).unwrap();
    let graph = oracle_experiment_graph(&data, &truth, 8, default_phi(&data)).unwrap();

    let gb = gamma_bounds(&data, &graph, &truth).unwrap();
    println!("gamma_min  = {:.4} attained at {:?}", gb.gamma_min, gb.arg_min);
    println!("gamma_max  = {:.4} attained at {:?}", gb.gamma_max, gb.arg_max);
    println!("gamma_max2 = {:.4} attained at {:?}", gb.gamma_max2, gb.arg_max2);
    println!("r = {:.4}, r2 = {:.4}", gb.r, gb.r2);
    println!(
        "size condition n > K(K+1): {}",
        check_assumption3(data.n(), truth.k())
    );

    let t = epsilon_thresholds_logn(gb.r, Some(gb.r2), data.d(), data.n(), 9.0).unwrap();
    println!(
        "log-n thresholds: eps_min = {:.4}, eps_sup = {:.4} (window nonempty: {})",
        t.eps_min, t.eps_sup, t.window_nonempty
    );
    let profile = SubgaussianProfile::default();
    let tk = epsilon_thresholds_logk(gb.r, Some(gb.r2), data.d(), truth.k(), 10.0, &profile)
        .unwrap();
    println!(
        "log-K thresholds: eps_min = {:.4}, eps_sup = {:.4}",
        tk.eps_min, tk.eps_sup
    );

    let eps = 0.5;
    let iv = recovery_interval_logn(&gb, eps, IntervalKind::PerfectRecovery).unwrap();
    println!(
        "perfect-recovery interval at eps = {eps}: [{:.4}, {:.4}) nonempty = {}",
        iv.lo, iv.hi, iv.nonempty
    );
    let m = embedding_dim_logn(eps, data.n(), 9.0).unwrap().min(data.d());
    let ivk =
        recovery_interval_logk(&gb, eps, m, data.d(), &profile, IntervalKind::PerfectRecovery)
            .unwrap();
    println!(
        "log-K interval at m = {m}: [{:.4}, {:.4}) nonempty = {}",
        ivk.lo, ivk.hi, ivk.nonempty
    );

    // Bounds recomputed on embedded data stay within the distortion
    // sandwich of the originals.
    let pi = sample_projection(m, data.d(), Family::Gaussian, 23).unwrap();
    let embedded = pi.project_data(&data).unwrap();
    let hb = hat_gamma_bounds(&embedded, &graph, &truth).unwrap();
    println!(
        "embedded bounds: gamma_min = {:.4} (in [{:.4}, {:.4}]), gamma_max = {:.4}",
        hb.gamma_min,
        (1.0 - eps).sqrt() * gb.gamma_min,
        (1.0 + eps).sqrt() * gb.gamma_min,
        hb.gamma_max
    );
}
