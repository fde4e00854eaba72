//! Shared helpers for the integration suites: an independent reference
//! minimizer, partition enumeration, and metric oracles.

#![allow(dead_code)]

use ndarray::Array2;
use rpcc::dataset::DataMatrix;
use rpcc::weights::WeightGraph;

/// High-accuracy reference minimizer for the clustering objective, used to
/// cross-check the production solver. It runs accelerated projected
/// gradient on the dual (each edge variable constrained to the ball of
/// radius `gamma * w_e`) and maps back through `X = A - B^T Lambda`. The
/// algorithm shares nothing with the ADMM path.
pub fn reference_solve(
    data: &DataMatrix,
    graph: &WeightGraph,
    gamma: f64,
    iters: usize,
) -> Array2<f64> {
    let a = data.values();
    let n = data.n();
    let dim = data.d();
    let edges = graph.edges();
    let ne = edges.len();
    if ne == 0 || gamma == 0.0 {
        return a.clone();
    }
    // Step size from the incidence operator's spectral bound:
    // lambda_max(B B^T) <= 2 * max degree.
    let mut deg = vec![0usize; n];
    for e in edges {
        deg[e.i] += 1;
        deg[e.j] += 1;
    }
    let lip = 2.0 * (*deg.iter().max().unwrap()).max(1) as f64;
    let step = 1.0 / lip;

    let mut lam = Array2::<f64>::zeros((ne, dim));
    let mut lam_prev = lam.clone();
    let mut t_k = 1.0f64;
    let mut x = Array2::<f64>::zeros((n, dim));
    for _ in 0..iters {
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt());
        let momentum = (t_k - 1.0) / t_next;
        // Extrapolated point y, overwriting lam_prev as scratch.
        let mut y = lam.clone();
        ndarray::Zip::from(&mut y)
            .and(&lam_prev)
            .for_each(|yv, &pv| *yv += momentum * (*yv - pv));
        // X(y) = A - B^T y, then ascent direction B X.
        x.assign(a);
        for (e, edge) in edges.iter().enumerate() {
            for k in 0..dim {
                let v = y[[e, k]];
                x[[edge.i, k]] -= v;
                x[[edge.j, k]] += v;
            }
        }
        lam_prev = lam;
        lam = y;
        for (e, edge) in edges.iter().enumerate() {
            let cap = gamma * edge.w;
            let mut norm_sq = 0.0;
            for k in 0..dim {
                let v = lam[[e, k]] + step * (x[[edge.i, k]] - x[[edge.j, k]]);
                lam[[e, k]] = v;
                norm_sq += v * v;
            }
            let norm = norm_sq.sqrt();
            if norm > cap {
                let scale = cap / norm;
                for k in 0..dim {
                    lam[[e, k]] *= scale;
                }
            }
        }
        t_k = t_next;
    }
    x.assign(a);
    for (e, edge) in edges.iter().enumerate() {
        for k in 0..dim {
            let v = lam[[e, k]];
            x[[edge.i, k]] -= v;
            x[[edge.j, k]] += v;
        }
    }
    x
}

/// All set partitions of `n` points as restricted-growth label strings
/// (labels 1-based, first appearance order).
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, pos: usize, max_used: usize, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for l in 1..=(max_used + 1) {
            cur[pos] = l;
            rec(cur, pos + 1, max_used.max(l), out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![1usize; n];
    rec(&mut cur, 1, 1, &mut out);
    out
}

/// Rand index and adjusted Rand index straight from pair counts.
pub fn pair_counting_oracle(a: &[usize], b: &[usize]) -> (f64, f64) {
    let n = a.len();
    let (mut n11, mut n00, mut n10, mut n01) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (false, false) => n00 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
            }
        }
    }
    let total = n11 + n00 + n10 + n01;
    let ri = (n11 + n00) / total;
    let denom = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
    let ari = if denom == 0.0 {
        1.0
    } else {
        2.0 * (n11 * n00 - n10 * n01) / denom
    };
    (ri, ari)
}

/// Accuracy by enumerating every injective matching of the smaller label
/// set into the larger.
pub fn matching_enumeration_oracle(a: &[usize], b: &[usize]) -> f64 {
    let ka = *a.iter().max().unwrap();
    let kb = *b.iter().max().unwrap();
    let (small, large, sa, sb) = if ka <= kb { (ka, kb, a, b) } else { (kb, ka, b, a) };
    let mut counts = vec![vec![0usize; large]; small];
    for (x, y) in sa.iter().zip(sb.iter()) {
        counts[x - 1][y - 1] += 1;
    }
    fn rec(counts: &[Vec<usize>], row: usize, used: &mut [bool], acc: usize, best: &mut usize) {
        if row == counts.len() {
            *best = (*best).max(acc);
            return;
        }
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                rec(counts, row + 1, used, acc + counts[row][col], best);
                used[col] = false;
            }
        }
    }
    let mut best = 0usize;
    let mut used = vec![false; large];
    rec(&counts, 0, &mut used, 0, &mut best);
    best as f64 / a.len() as f64
}
