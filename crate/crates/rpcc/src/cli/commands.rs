//! Implementations of the experiment commands. Each returns the full
//! artifact set in memory; the runner persists it atomically.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::ArtifactSet;
use crate::baseline::{self, KMeansConfig};
use crate::bounds::{
    check_assumption3, epsilon_thresholds_logk, epsilon_thresholds_logn, gamma_bounds,
    hat_gamma_bounds, recovery_interval_logk, recovery_interval_logn, EpsilonThresholds,
    GammaBounds, GammaInterval, IntervalKind,
};
use crate::dataset::Partition;
use crate::error::{Error, Result};
use crate::metrics::{accuracy, adjusted_rand_index, rand_index};
use crate::path::{detect_perfect_recovery, sweep};
use crate::projection::{
    build_difference_sets, embedding_dim_logk, embedding_dim_logn, sample_projection,
    SubgaussianProfile,
};
use crate::solver::{extract_partition, solve as solve_instance, ProblemInstance};
use crate::weights::check_assumption2;

fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}

/// JSON value for a float that may be infinite.
fn jnum(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn matrix_csv(values: &ndarray::Array2<f64>, labels: Option<&Partition>) -> String {
    let mut out = String::new();
    for (i, row) in values.rows().into_iter().enumerate() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_float(*v));
            first = false;
        }
        if let Some(p) = labels {
            write!(out, ",{}", p.label(i)).unwrap();
        }
        out.push('\n');
    }
    out
}

fn partition_csv(p: &Partition) -> String {
    let mut out = String::new();
    for &l in p.labels() {
        writeln!(out, "{l}").unwrap();
    }
    out
}

fn weights_csv(graph: &crate::weights::WeightGraph) -> String {
    let mut out = String::new();
    for e in graph.edges() {
        writeln!(out, "{},{},{}", e.i + 1, e.j + 1, fmt_float(e.w)).unwrap();
    }
    out
}

fn gamma_bounds_json(gb: &GammaBounds) -> Value {
    json!({
        "gamma_min": jnum(gb.gamma_min),
        "gamma_max": jnum(gb.gamma_max),
        "gamma_max2": jnum(gb.gamma_max2),
        "r": jnum(gb.r),
        "r2": jnum(gb.r2),
        "arg_min": gb.arg_min,
        "arg_max": gb.arg_max,
        "arg_max2": gb.arg_max2,
    })
}

fn thresholds_json(t: &EpsilonThresholds) -> Value {
    serde_json::to_value(t).expect("thresholds serialize")
}

fn interval_json(iv: &GammaInterval) -> Value {
    json!({
        "lo": jnum(iv.lo),
        "hi": jnum(iv.hi),
        "nonempty": iv.nonempty,
        "kind": iv.kind,
    })
}

fn metrics_json(p: &Partition, truth: &Partition) -> Result<Value> {
    Ok(json!({
        "rand_index": rand_index(p, truth)?,
        "adjusted_rand_index": adjusted_rand_index(p, truth)?,
        "accuracy": accuracy(p, truth)?,
        "k_found": p.k(),
    }))
}

/// Resolve the embedding dimension from the projection section: explicit
/// `m`, otherwise the dimension formula at the given distortion.
fn resolve_m(
    cfg: &ExperimentConfig,
    n: usize,
    truth: Option<&Partition>,
    epsilon: Option<f64>,
) -> Result<usize> {
    let p = cfg
        .projection
        .as_ref()
        .ok_or_else(|| Error::Validation(vec!["projection: section missing".into()]))?;
    if let Some(m) = p.m {
        return Ok(m);
    }
    let eps = epsilon
        .or(p.epsilon)
        .ok_or_else(|| Error::Validation(vec!["projection: needs m or epsilon".into()]))?;
    match p.dim_rule.as_deref().unwrap_or("logn") {
        "logn" => embedding_dim_logn(eps, n, p.c.unwrap_or(9.0)),
        "logk" => {
            let truth = truth.ok_or_else(|| {
                Error::Validation(vec![
                    "projection.dim_rule = logk requires a labeled dataset".into(),
                ])
            })?;
            embedding_dim_logk(eps, truth.k(), p.c.unwrap_or(10.0))
        }
        other => Err(Error::Validation(vec![format!(
            "projection.dim_rule: unknown rule {other:?}"
        )])),
    }
}

pub fn gen(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let mut out = ArtifactSet::default();
    out.push("data.csv", matrix_csv(data.values(), truth.as_ref()));
    out.push(
        "summary.json",
        serde_json::to_string_pretty(&json!({
            "n": data.n(),
            "d": data.d(),
            "k": truth.as_ref().map(|t| t.k()),
            "cluster_sizes": truth.as_ref().map(|t| t.sizes()),
        }))?,
    );
    Ok(out)
}

pub fn weights(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let graph = cfg.build_graph(&data, truth.as_ref())?;
    let mut out = ArtifactSet::default();
    out.push("weights.csv", weights_csv(&graph));
    if let Some(t) = &truth {
        let report = check_assumption2(&graph, t);
        out.push("assumption.json", serde_json::to_string_pretty(&report)?);
    }
    Ok(out)
}

pub fn project(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let p = cfg.projection.as_ref().unwrap();
    let m = resolve_m(cfg, data.n(), truth.as_ref(), None)?;
    let family = cfg.projection_family()?;
    let pi = sample_projection(m, data.d(), family, seed.unwrap_or(p.seed))?;
    let embedded = pi.project_data(&data)?;
    let mut out = ArtifactSet::default();
    out.push("pi.csv", matrix_csv(pi.values(), None));
    out.push("pi.json", serde_json::to_string_pretty(&pi.meta())?);
    out.push(
        "embedded.csv",
        matrix_csv(embedded.values(), truth.as_ref()),
    );
    Ok(out)
}

pub fn solve(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let graph = cfg.build_graph(&data, truth.as_ref())?;
    let gamma = cfg.gamma.unwrap();
    let settings = cfg.solver_settings();
    let inst = ProblemInstance::new(&data, &graph, gamma)?;
    let res = solve_instance(&inst, &settings)?;
    if !res.success {
        return Err(Error::NonConvergence(format!(
            "gamma = {gamma}: gap {} after {} iterations (tol {})",
            res.rel_gap, res.iterations, settings.tol
        )));
    }
    let part = extract_partition(&res);
    let mut doc = json!({
        "gamma": gamma,
        "primal_obj": res.primal_obj,
        "dual_obj": res.dual_obj,
        "rel_gap": res.rel_gap,
        "iterations": res.iterations,
        "tau_merge": res.tau_merge,
        "k_found": part.k(),
        "fused_edges": res.fused_edges.iter().map(|&(i, j)| (i + 1, j + 1)).collect::<Vec<_>>(),
    });
    if let Some(t) = &truth {
        doc["metrics"] = metrics_json(&part, t)?;
    }
    let mut out = ArtifactSet::default();
    out.push("x.csv", matrix_csv(&res.x, None));
    out.push("partition.csv", partition_csv(&part));
    out.push("result.json", serde_json::to_string_pretty(&doc)?);
    Ok(out)
}

fn path_csv(path: &crate::path::ClusteringPath) -> String {
    let mut out = String::from("gamma,k_found,rand_index,adjusted_rand_index,accuracy,rel_gap\n");
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for p in &path.points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(p.gamma),
            p.k_found,
            opt(p.rand_index),
            opt(p.adjusted_rand_index),
            opt(p.accuracy),
            fmt_float(p.rel_gap),
        )
        .unwrap();
    }
    out
}

pub fn path(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let graph = cfg.build_graph(&data, truth.as_ref())?;
    let grid = cfg.grid.as_ref().unwrap().values()?;
    let settings = cfg.solver_settings();
    let path = sweep(&data, &graph, &grid, truth.as_ref(), &settings)?;
    let mut summary = json!({
        "points": path.points.len(),
        "converged": path.points.iter().filter(|p| p.converged).count(),
        "instance_hash": format!("{:016x}", path.provenance.instance_hash),
    });
    if let Some(t) = &truth {
        let report = detect_perfect_recovery(&path, t, None);
        summary["perfect_gammas"] = json!(report.perfect_gammas);
        let best = path.points.iter().max_by(|a, b| {
            a.adjusted_rand_index
                .partial_cmp(&b.adjusted_rand_index)
                .unwrap()
        });
        if let Some(b) = best {
            summary["best"] = json!({
                "gamma": b.gamma,
                "adjusted_rand_index": b.adjusted_rand_index,
                "rand_index": b.rand_index,
                "k_found": b.k_found,
            });
        }
    }
    let mut out = ArtifactSet::default();
    out.push("path.csv", path_csv(&path));
    out.push("summary.json", serde_json::to_string_pretty(&summary)?);
    Ok(out)
}

pub fn bounds(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let truth = truth.ok_or_else(|| {
        Error::Validation(vec!["bounds requires a labeled dataset".into()])
    })?;
    let graph = cfg.build_graph(&data, Some(&truth))?;
    let bc = cfg.bounds.clone().unwrap_or_default();
    let profile = SubgaussianProfile::new(bc.c_kappa_sq.unwrap_or(1.0), bc.t.unwrap_or(2.0))?;
    let c_logn = bc.c_logn.unwrap_or(9.0);
    let c_logk = bc.c_logk.unwrap_or(10.0);

    let report = check_assumption2(&graph, &truth);
    let gb = gamma_bounds(&data, &graph, &truth)?;
    let mut doc = json!({
        "n": data.n(),
        "d": data.d(),
        "k": truth.k(),
        "assumption2": report,
        "assumption3": check_assumption3(data.n(), truth.k()),
        "gamma": gamma_bounds_json(&gb),
    });

    if gb.r.is_finite() {
        let t_logn = epsilon_thresholds_logn(
            gb.r,
            gb.r2.is_finite().then_some(gb.r2),
            data.d(),
            data.n(),
            c_logn,
        )?;
        doc["epsilon_thresholds"]["log_n"] = thresholds_json(&t_logn);
        if truth.k() >= 2 {
            let t_logk = epsilon_thresholds_logk(
                gb.r,
                gb.r2.is_finite().then_some(gb.r2),
                data.d(),
                truth.k(),
                c_logk,
                &profile,
            )?;
            doc["epsilon_thresholds"]["log_k"] = thresholds_json(&t_logk);
        }
    }

    if let Some(p) = &cfg.projection {
        if let Some(eps) = p.epsilon {
            doc["intervals"]["log_n"] = json!({
                "perfect_recovery": interval_json(&recovery_interval_logn(
                    &gb, eps, IntervalKind::PerfectRecovery)?),
                "coarsening": interval_json(&recovery_interval_logn(
                    &gb, eps, IntervalKind::Coarsening)?),
            });
        }
        let m = resolve_m(cfg, data.n(), Some(&truth), None)?;
        if let Some(eps) = p.epsilon {
            if m <= data.d() {
                doc["intervals"]["log_k"] = json!({
                    "perfect_recovery": interval_json(&recovery_interval_logk(
                        &gb, eps, m, data.d(), &profile, IntervalKind::PerfectRecovery)?),
                });
            }
        }
        let family = cfg.projection_family()?;
        let pi = sample_projection(m, data.d(), family, seed.unwrap_or(p.seed))?;
        let embedded = pi.project_data(&data)?;
        let hb = hat_gamma_bounds(&embedded, &graph, &truth)?;
        doc["hat"] = json!({
            "m": m,
            "gamma": gamma_bounds_json(&hb),
        });
    }

    let mut out = ArtifactSet::default();
    out.push("bounds.json", serde_json::to_string_pretty(&doc)?);
    Ok(out)
}

struct JlTrialStats {
    all_preserved: [bool; 3],
    fractions: [f64; 3],
}

pub fn verify_jl(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let p = cfg.projection.as_ref().unwrap();
    let trials = p.trials.unwrap_or(100);
    let epsilons: Vec<f64> = match (&p.epsilons, p.epsilon) {
        (Some(list), _) => list.clone(),
        (None, Some(e)) => vec![e],
        (None, None) => {
            return Err(Error::Validation(vec![
                "projection: verify-jl needs epsilon or epsilons".into(),
            ]))
        }
    };
    let family = cfg.projection_family()?;
    let base_seed = seed.unwrap_or(p.seed);

    let n = data.n();
    // Original squared norms, computed once: all pairs, within-cluster
    // pairs, centroid differences.
    let all_pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let orig_all: Vec<f64> = all_pairs.iter().map(|&(i, j)| data.sq_dist(i, j)).collect();
    let ds = truth
        .as_ref()
        .map(|t| build_difference_sets(&data, t))
        .transpose()?;
    let within_pairs: Vec<(usize, usize)> = ds
        .as_ref()
        .map(|d| d.within_pairs().iter().flatten().copied().collect())
        .unwrap_or_default();
    let orig_within: Vec<f64> = within_pairs
        .iter()
        .map(|&(i, j)| data.sq_dist(i, j))
        .collect();
    let centroids = ds.as_ref().map(|d| d.centroids().clone());
    let orig_centroid: Vec<f64> = centroids
        .as_ref()
        .map(|c| {
            let k1 = c.nrows();
            let mut v = Vec::new();
            for a in 0..k1 {
                for b in (a + 1)..k1 {
                    v.push(
                        c.row(a)
                            .iter()
                            .zip(c.row(b).iter())
                            .map(|(x, y)| (x - y) * (x - y))
                            .sum(),
                    );
                }
            }
            v
        })
        .unwrap_or_default();

    let mut csv = String::from("m,epsilon,trials,p_xa,xa_pct,p_xv,xv_pct,p_xc,xc_pct\n");
    for &eps in &epsilons {
        let m = resolve_m(cfg, n, truth.as_ref(), Some(eps))?;
        let stats: Vec<JlTrialStats> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<JlTrialStats> {
                let pi = sample_projection(
                    m,
                    data.d(),
                    family,
                    base_seed.wrapping_add(t as u64),
                )?;
                let embedded = pi.project_data(&data)?;
                let proj_sq = |i: usize, j: usize| embedded.sq_dist(i, j);
                let count = |pairs: &[(usize, usize)], orig: &[f64]| {
                    let mut kept = 0usize;
                    for (&(i, j), &o) in pairs.iter().zip(orig) {
                        let pr = proj_sq(i, j);
                        if o == 0.0 || (pr >= (1.0 - eps) * o && pr <= (1.0 + eps) * o) {
                            kept += 1;
                        }
                    }
                    kept
                };
                let kept_all = count(&all_pairs, &orig_all);
                let kept_within = count(&within_pairs, &orig_within);
                let kept_centroid = match &centroids {
                    Some(cent) => {
                        let pc = cent.dot(&pi.values().t());
                        let k1 = pc.nrows();
                        let mut kept = 0usize;
                        let mut idx = 0usize;
                        for a in 0..k1 {
                            for b in (a + 1)..k1 {
                                let pr: f64 = pc
                                    .row(a)
                                    .iter()
                                    .zip(pc.row(b).iter())
                                    .map(|(x, y)| (x - y) * (x - y))
                                    .sum();
                                let o = orig_centroid[idx];
                                idx += 1;
                                if o == 0.0
                                    || (pr >= (1.0 - eps) * o && pr <= (1.0 + eps) * o)
                                {
                                    kept += 1;
                                }
                            }
                        }
                        kept
                    }
                    None => 0,
                };
                let frac = |kept: usize, total: usize| {
                    if total == 0 {
                        1.0
                    } else {
                        kept as f64 / total as f64
                    }
                };
                Ok(JlTrialStats {
                    all_preserved: [
                        kept_all == all_pairs.len(),
                        kept_within == within_pairs.len(),
                        kept_centroid == orig_centroid.len(),
                    ],
                    fractions: [
                        frac(kept_all, all_pairs.len()),
                        frac(kept_within, within_pairs.len()),
                        frac(kept_centroid, orig_centroid.len()),
                    ],
                })
            })
            .collect::<Result<_>>()?;
        let success = |k: usize| stats.iter().filter(|s| s.all_preserved[k]).count();
        let avg = |k: usize| {
            stats.iter().map(|s| s.fractions[k]).sum::<f64>() / trials.max(1) as f64
        };
        writeln!(
            csv,
            "{m},{eps},{trials},{},{},{},{},{},{}",
            success(0),
            fmt_float(avg(0)),
            success(1),
            fmt_float(avg(1)),
            success(2),
            fmt_float(avg(2)),
        )
        .unwrap();
    }
    let mut out = ArtifactSet::default();
    out.push("verify_jl.csv", csv);
    Ok(out)
}

fn kmeans_config(cfg: &ExperimentConfig, truth: Option<&Partition>, seed: Option<u64>) -> Result<KMeansConfig> {
    let section = cfg.kmeans.clone().unwrap_or_default();
    let k = section
        .k
        .or_else(|| truth.map(|t| t.k()))
        .ok_or_else(|| Error::Validation(vec!["kmeans.k: required without labels".into()]))?;
    let mut out = KMeansConfig::new(k);
    if let Some(v) = section.max_iter {
        out.max_iter = v;
    }
    if let Some(v) = section.replicates {
        out.replicates = v;
    }
    out.seed = seed.or(section.seed).unwrap_or(0);
    Ok(out)
}

pub fn kmeans(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let kcfg = kmeans_config(cfg, truth.as_ref(), seed)?;
    let (part, inertia) = match &cfg.projection {
        Some(p) => {
            let m = resolve_m(cfg, data.n(), truth.as_ref(), None)?;
            let family = cfg.projection_family()?;
            let pi = sample_projection(m, data.d(), family, seed.unwrap_or(p.seed))?;
            baseline::rp_kmeans(&data, &pi, &kcfg)?
        }
        None => baseline::kmeans(&data, &kcfg)?,
    };
    let mut doc = json!({
        "k": kcfg.k,
        "replicates": kcfg.replicates,
        "inertia": inertia,
    });
    if let Some(t) = &truth {
        doc["metrics"] = metrics_json(&part, t)?;
    }
    let mut out = ArtifactSet::default();
    out.push("partition.csv", partition_csv(&part));
    out.push("result.json", serde_json::to_string_pretty(&doc)?);
    Ok(out)
}

pub fn compare(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<ArtifactSet> {
    let (data, truth) = cfg.build_dataset(seed)?;
    let truth = truth.ok_or_else(|| {
        Error::Validation(vec!["compare requires a labeled dataset".into()])
    })?;
    let graph = cfg.build_graph(&data, Some(&truth))?;
    let grid = cfg.grid.as_ref().unwrap().values()?;
    let settings = cfg.solver_settings();
    let cc = cfg.compare.as_ref().unwrap();
    let family = cfg.projection_family()?;
    let base_seed = seed
        .or(cfg.projection.as_ref().map(|p| p.seed))
        .unwrap_or(0);
    let kcfg = kmeans_config(cfg, Some(&truth), seed)?;

    let mut csv = String::from(
        "m,trial,rpccm_perfect,rpccm_best_ri,rpccm_best_ari,rpkmeans_ri,rpkmeans_ari\n",
    );
    let mut summary = Vec::new();
    for (mi, &m) in cc.ms.iter().enumerate() {
        let rows: Vec<(bool, f64, f64, f64, f64)> = (0..cc.trials)
            .into_par_iter()
            .map(|t| -> Result<(bool, f64, f64, f64, f64)> {
                // One projection shared by both models.
                let pi_seed = base_seed
                    .wrapping_add((mi as u64) << 32)
                    .wrapping_add(t as u64);
                let pi = sample_projection(m, data.d(), family, pi_seed)?;
                let embedded = pi.project_data(&data)?;
                let path = sweep(&embedded, &graph, &grid, Some(&truth), &settings)?;
                let perfect = path
                    .points
                    .iter()
                    .any(|p| p.partition.same_clustering(&truth));
                let best = path
                    .points
                    .iter()
                    .max_by(|a, b| {
                        a.adjusted_rand_index
                            .partial_cmp(&b.adjusted_rand_index)
                            .unwrap()
                    })
                    .expect("nonempty path");
                let mut kc = kcfg;
                kc.seed = kcfg.seed.wrapping_add(pi_seed);
                let (kpart, _) = baseline::rp_kmeans(&data, &pi, &kc)?;
                Ok((
                    perfect,
                    best.rand_index.unwrap(),
                    best.adjusted_rand_index.unwrap(),
                    rand_index(&kpart, &truth)?,
                    adjusted_rand_index(&kpart, &truth)?,
                ))
            })
            .collect::<Result<_>>()?;
        let mut perfect_count = 0usize;
        let mut sums = [0.0f64; 4];
        for (t, row) in rows.iter().enumerate() {
            if row.0 {
                perfect_count += 1;
            }
            sums[0] += row.1;
            sums[1] += row.2;
            sums[2] += row.3;
            sums[3] += row.4;
            writeln!(
                csv,
                "{m},{t},{},{},{},{},{}",
                row.0,
                fmt_float(row.1),
                fmt_float(row.2),
                fmt_float(row.3),
                fmt_float(row.4),
            )
            .unwrap();
        }
        let nt = cc.trials as f64;
        summary.push(json!({
            "m": m,
            "trials": cc.trials,
            "rpccm_perfect": perfect_count,
            "rpccm_mean_ri": sums[0] / nt,
            "rpccm_mean_ari": sums[1] / nt,
            "rpkmeans_mean_ri": sums[2] / nt,
            "rpkmeans_mean_ari": sums[3] / nt,
        }));
    }
    let mut out = ArtifactSet::default();
    out.push("compare.csv", csv);
    out.push(
        "summary.json",
        serde_json::to_string_pretty(&Value::Array(summary))?,
    );
    Ok(out)
}
