//! Fusion-weight graphs: k-NN Gaussian-kernel weights, uniform weights,
//! k-NN graphs augmented with within-cluster cliques, and the in-cluster
//! weight condition that the recovery bounds require.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{DataMatrix, Partition};
use crate::error::{Error, Result};

/// One undirected edge with `i < j` (0-based node ids).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// A sparse symmetric weight graph over `n` nodes. Each unordered pair is
/// stored once; absent pairs have weight zero.
#[derive(Debug, Clone)]
pub struct WeightGraph {
    n: usize,
    edges: Vec<Edge>,
    adj_offsets: Vec<usize>,
    adj: Vec<(usize, usize)>, // (neighbor, edge index), sorted by neighbor
}

impl WeightGraph {
    /// Build from an edge list; pairs are normalized to `i < j`, duplicates
    /// rejected, self-loops and negative weights rejected.
    pub fn from_edges(n: usize, raw: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut edges = Vec::with_capacity(raw.len());
        for (a, b, w) in raw {
            if a == b {
                return Err(Error::Parameter(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Parameter(format!(
                    "edge ({a},{b}) out of range for n = {n}"
                )));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Parameter(format!("weight {w} on ({a},{b})")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            edges.push(Edge { i, j, w });
        }
        edges.sort_by(|x, y| (x.i, x.j).cmp(&(y.i, y.j)));
        if edges.windows(2).any(|p| (p[0].i, p[0].j) == (p[1].i, p[1].j)) {
            return Err(Error::Parameter("duplicate edge in list".into()));
        }
        Ok(Self::from_sorted(n, edges))
    }

    fn from_sorted(n: usize, edges: Vec<Edge>) -> Self {
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.i] += 1;
            degree[e.j] += 1;
        }
        let mut adj_offsets = vec![0usize; n + 1];
        for v in 0..n {
            adj_offsets[v + 1] = adj_offsets[v] + degree[v];
        }
        let mut cursor = adj_offsets.clone();
        let mut adj = vec![(0usize, 0usize); adj_offsets[n]];
        for (idx, e) in edges.iter().enumerate() {
            adj[cursor[e.i]] = (e.j, idx);
            cursor[e.i] += 1;
            adj[cursor[e.j]] = (e.i, idx);
            cursor[e.j] += 1;
        }
        for v in 0..n {
            adj[adj_offsets[v]..adj_offsets[v + 1]].sort_unstable_by_key(|p| p.0);
        }
        Self {
            n,
            edges,
            adj_offsets,
            adj,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbors of `v` as `(neighbor, weight)` pairs.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[self.adj_offsets[v]..self.adj_offsets[v + 1]]
            .iter()
            .map(move |&(u, e)| (u, self.edges[e].w))
    }

    /// Weight of the unordered pair `(a, b)`; zero when no edge exists.
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        let slice = &self.adj[self.adj_offsets[a]..self.adj_offsets[a + 1]];
        match slice.binary_search_by_key(&b, |p| p.0) {
            Ok(pos) => self.edges[slice[pos].1].w,
            Err(_) => 0.0,
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let slice = &self.adj[self.adj_offsets[a]..self.adj_offsets[a + 1]];
        slice.binary_search_by_key(&b, |p| p.0).is_ok()
    }

    /// Write the edge list as CSV triplets `i,j,w` with 1-based indices and
    /// `i < j`.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for e in &self.edges {
            writeln!(out, "{},{},{:?}", e.i + 1, e.j + 1, e.w).unwrap();
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Read a CSV triplet file produced by [`WeightGraph::save_csv`].
    pub fn load_csv(path: &Path, n: usize) -> Result<Self> {
        let file = fs::File::open(path)?;
        let mut raw = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let row = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    row,
                    message: format!("expected i,j,w, found {} fields", parts.len()),
                });
            }
            let i: usize = parts[0].trim().parse().map_err(|_| Error::Parse {
                row,
                message: format!("bad node id {:?}", parts[0]),
            })?;
            let j: usize = parts[1].trim().parse().map_err(|_| Error::Parse {
                row,
                message: format!("bad node id {:?}", parts[1]),
            })?;
            let w: f64 = parts[2].trim().parse().map_err(|_| Error::Parse {
                row,
                message: format!("bad weight {:?}", parts[2]),
            })?;
            if i == 0 || j == 0 {
                return Err(Error::Parse {
                    row,
                    message: "node ids are 1-based".into(),
                });
            }
            raw.push((i - 1, j - 1, w));
        }
        Self::from_edges(n, raw)
    }
}

/// The default kernel scale `phi = 1/d`.
pub fn default_phi(data: &DataMatrix) -> f64 {
    1.0 / data.d() as f64
}

/// Indices of the `k` nearest neighbors of every point, ties broken by the
/// smaller point index. Exact brute force.
fn knn_pairs(data: &DataMatrix, k: usize) -> Vec<(usize, usize)> {
    let n = data.n();
    let per_point: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (data.sq_dist(i, j), j))
                .collect();
            cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cand.truncate(k);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = per_point
        .iter()
        .enumerate()
        .flat_map(|(i, nbrs)| {
            nbrs.iter()
                .map(move |&j| if i < j { (i, j) } else { (j, i) })
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn kernel_graph(data: &DataMatrix, pairs: Vec<(usize, usize)>, phi: f64) -> WeightGraph {
    let edges: Vec<Edge> = pairs
        .into_iter()
        .map(|(i, j)| Edge {
            i,
            j,
            w: (-phi * data.sq_dist(i, j)).exp(),
        })
        .collect();
    WeightGraph::from_sorted(data.n(), edges)
}

/// Gaussian-kernel weights `exp(-phi |a_i - a_j|^2)` on the symmetric
/// k-nearest-neighbor edge set: `(i, j)` is an edge when `i` is among `j`'s
/// `k` nearest neighbors or vice versa.
pub fn knn_gaussian_weights(data: &DataMatrix, k: usize, phi: f64) -> Result<WeightGraph> {
    if k == 0 || k >= data.n() {
        return Err(Error::Parameter(format!(
            "k = {k} must satisfy 1 <= k < n = {}",
            data.n()
        )));
    }
    if !(phi > 0.0) {
        return Err(Error::Parameter(format!("phi = {phi} must be positive")));
    }
    Ok(kernel_graph(data, knn_pairs(data, k), phi))
}

/// The complete graph on `n` nodes with unit weights.
pub fn uniform_weights(n: usize) -> Result<WeightGraph> {
    if n < 2 {
        return Err(Error::Parameter(format!("n = {n} must be >= 2")));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push(Edge { i, j, w: 1.0 });
        }
    }
    Ok(WeightGraph::from_sorted(n, edges))
}

/// The union of the symmetric k-NN edge set and all within-cluster pairs of
/// the ground-truth partition, with Gaussian-kernel weights on every edge.
/// This is the graph the recovery-bound experiments use, since it makes the
/// in-cluster weight condition easy to satisfy.
pub fn oracle_experiment_graph(
    data: &DataMatrix,
    truth: &Partition,
    k: usize,
    phi: f64,
) -> Result<WeightGraph> {
    if truth.n() != data.n() {
        return Err(Error::Shape(format!(
            "partition covers {} points, data has {}",
            truth.n(),
            data.n()
        )));
    }
    if k == 0 || k >= data.n() {
        return Err(Error::Parameter(format!(
            "k = {k} must satisfy 1 <= k < n = {}",
            data.n()
        )));
    }
    if !(phi > 0.0) {
        return Err(Error::Parameter(format!("phi = {phi} must be positive")));
    }
    let mut pairs = knn_pairs(data, k);
    for members in truth.cluster_indices() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[(a + 1)..] {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    Ok(kernel_graph(data, pairs, phi))
}

/// Outcome of checking the in-cluster weight condition: every within-cluster
/// pair needs `w_ij > 0` and `n_alpha * w_ij > mu_ij`, where `mu_ij` sums the
/// per-cluster weight-mass differences of the two endpoints over the other
/// clusters.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub holds: bool,
    /// `(alpha, i, j)`: 1-based cluster id and 0-based endpoints of the pair
    /// attaining the margin.
    pub worst_pair: Option<(usize, usize, usize)>,
    /// `min` over in-cluster pairs of `n_alpha * w_ij - mu_ij`; `+inf` when
    /// no cluster has two points.
    pub margin: f64,
    /// `mu_ij` of the worst pair.
    pub worst_mu: Option<f64>,
    /// Whether every in-cluster pair has a strictly positive weight.
    pub positive_weights: bool,
}

/// Per-cluster weight masses `w_i^(beta) = sum_{j in I_beta} w_ij` for
/// every point, as an `n x K` row-major table.
pub fn cluster_weight_masses(graph: &WeightGraph, truth: &Partition) -> Vec<f64> {
    let n = graph.n();
    let k = truth.k();
    let mut masses = vec![0.0; n * k];
    for e in graph.edges() {
        masses[e.i * k + truth.label(e.j) - 1] += e.w;
        masses[e.j * k + truth.label(e.i) - 1] += e.w;
    }
    masses
}

/// `mu_ij` for two points of the same cluster: the summed absolute
/// differences of their weight masses over all other clusters.
pub fn mu_pair(graph: &WeightGraph, truth: &Partition, i: usize, j: usize) -> Result<f64> {
    if truth.label(i) != truth.label(j) {
        return Err(Error::Parameter(format!(
            "points {i} and {j} are in different clusters"
        )));
    }
    let masses = cluster_weight_masses(graph, truth);
    let k = truth.k();
    let alpha = truth.label(i);
    Ok(mu_from_masses(&masses, k, alpha, i, j))
}

fn mu_from_masses(masses: &[f64], k: usize, alpha: usize, i: usize, j: usize) -> f64 {
    let wi = &masses[i * k..(i + 1) * k];
    let wj = &masses[j * k..(j + 1) * k];
    wi.iter()
        .zip(wj)
        .enumerate()
        .filter(|(beta, _)| beta + 1 != alpha)
        .map(|(_, (a, b))| (a - b).abs())
        .sum()
}

/// Check the in-cluster weight condition for the given graph and partition.
pub fn check_assumption2(graph: &WeightGraph, truth: &Partition) -> AssumptionReport {
    assert_eq!(graph.n(), truth.n(), "graph and partition sizes differ");
    let k = truth.k();
    let masses = cluster_weight_masses(graph, truth);
    let sizes = truth.sizes();
    let mut margin = f64::INFINITY;
    let mut worst = None;
    let mut worst_mu = None;
    let mut positive = true;
    for (c, members) in truth.cluster_indices().iter().enumerate() {
        let alpha = c + 1;
        let n_alpha = sizes[c] as f64;
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[(a + 1)..] {
                let w = graph.weight(i, j);
                if w <= 0.0 {
                    positive = false;
                }
                let mu = mu_from_masses(&masses, k, alpha, i, j);
                let m = n_alpha * w - mu;
                if m < margin {
                    margin = m;
                    worst = Some((alpha, i, j));
                    worst_mu = Some(mu);
                }
            }
        }
    }
    AssumptionReport {
        holds: margin > 0.0 && positive,
        worst_pair: worst,
        margin,
        worst_mu,
        positive_weights: positive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn matrix(rows: &[&[f64]]) -> DataMatrix {
        let n = rows.len();
        let d = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        DataMatrix::new(ndarray::Array2::from_shape_vec((n, d), flat).unwrap()).unwrap()
    }

    #[test]
    fn knn_on_collinear_points() {
        let data = matrix(&[&[0.0], &[1.0], &[10.0]]);
        let g = knn_gaussian_weights(&data, 1, 1.0).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!((g.weight(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((g.weight(1, 2) - (-81.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn vanishing_phi_gives_unit_weights() {
        let data = matrix(&[&[0.0, 1.0], &[2.0, 3.0], &[4.0, 0.5]]);
        let g = knn_gaussian_weights(&data, 2, 1e-300).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.edges().iter().all(|e| e.w == 1.0));
    }

    #[test]
    fn duplicate_points_weigh_one() {
        let data = matrix(&[&[1.5], &[1.5], &[9.0]]);
        let g = knn_gaussian_weights(&data, 1, 0.7).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
    }

    #[test]
    fn knn_rejects_bad_k() {
        let data = matrix(&[&[0.0], &[1.0]]);
        assert!(knn_gaussian_weights(&data, 2, 1.0).is_err());
        assert!(knn_gaussian_weights(&data, 0, 1.0).is_err());
    }

    #[test]
    fn uniform_graph_is_complete() {
        let g = uniform_weights(3).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.edges().iter().all(|e| e.w == 1.0));
        let g2 = uniform_weights(2).unwrap();
        assert_eq!(g2.edges(), &[Edge { i: 0, j: 1, w: 1.0 }]);
        assert_eq!(uniform_weights(100).unwrap().edge_count(), 4950);
        assert!(uniform_weights(1).is_err());
    }

    #[test]
    fn oracle_graph_single_cluster_is_complete() {
        let data = matrix(&[&[0.0], &[1.0], &[5.0], &[9.0]]);
        let truth = Partition::new(vec![1, 1, 1, 1]).unwrap();
        let g = oracle_experiment_graph(&data, &truth, 1, 1.0).unwrap();
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn oracle_graph_bridges_singletons_via_knn() {
        let data = matrix(&[&[0.0], &[3.0]]);
        let truth = Partition::new(vec![1, 2]).unwrap();
        let g = oracle_experiment_graph(&data, &truth, 1, 1.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!((g.weight(0, 1) - (-9.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn oracle_graph_contains_knn_graph() {
        let data = matrix(&[&[0.0, 0.1], &[0.2, 0.0], &[5.0, 5.0], &[5.1, 4.9], &[9.0, 1.0]]);
        let truth = Partition::new(vec![1, 1, 2, 2, 2]).unwrap();
        let knn = knn_gaussian_weights(&data, 2, 0.5).unwrap();
        let oracle = oracle_experiment_graph(&data, &truth, 2, 0.5).unwrap();
        for e in knn.edges() {
            assert!(oracle.has_edge(e.i, e.j));
            assert!((oracle.weight(e.i, e.j) - e.w).abs() < 1e-15);
        }
        // Every in-cluster pair is present.
        for members in truth.cluster_indices() {
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[(a + 1)..] {
                    assert!(oracle.has_edge(i, j));
                }
            }
        }
    }

    #[test]
    fn each_point_keeps_its_k_nearest() {
        let data = matrix(&[&[0.0], &[0.4], &[1.0], &[4.0], &[4.5]]);
        let k = 2;
        let g = knn_gaussian_weights(&data, k, 1.0).unwrap();
        for i in 0..data.n() {
            let mut cand: Vec<(f64, usize)> = (0..data.n())
                .filter(|&j| j != i)
                .map(|j| (data.sq_dist(i, j), j))
                .collect();
            cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (_, j) in cand.into_iter().take(k) {
                assert!(g.has_edge(i, j), "missing neighbor ({i},{j})");
            }
        }
    }

    #[test]
    fn weight_lookup_is_symmetric() {
        let data = matrix(&[&[0.0, 0.0], &[1.0, 0.5], &[2.0, 2.0], &[3.5, 1.0]]);
        let g = knn_gaussian_weights(&data, 2, 0.3).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.weight(i, j), g.weight(j, i));
            }
        }
    }

    #[test]
    fn uniform_weights_satisfy_assumption() {
        let g = uniform_weights(5).unwrap();
        let truth = Partition::new(vec![1, 1, 1, 2, 2]).unwrap();
        let rep = check_assumption2(&g, &truth);
        assert!(rep.holds);
        // mu vanishes for uniform weights, so the margin is min n_alpha.
        assert_eq!(rep.margin, 2.0);
    }

    #[test]
    fn missing_in_cluster_edge_fails_assumption() {
        let g = WeightGraph::from_edges(3, vec![(0, 2, 1.0)]).unwrap();
        let truth = Partition::new(vec![1, 1, 2]).unwrap();
        let rep = check_assumption2(&g, &truth);
        assert!(!rep.holds);
        assert!(!rep.positive_weights);
    }

    #[test]
    fn margin_matches_hand_computation() {
        // Clusters {0,1} and {2,3}; within-cluster weights 1, one cross
        // edge (0,2) of weight 1. Then mu_01 = |1 - 0| = 1 and the margin
        // is 2*1 - 1 = 1.
        let g = WeightGraph::from_edges(4, vec![(0, 1, 1.0), (2, 3, 1.0), (0, 2, 1.0)]).unwrap();
        let truth = Partition::new(vec![1, 1, 2, 2]).unwrap();
        let rep = check_assumption2(&g, &truth);
        assert!(rep.holds);
        assert!((rep.margin - 1.0).abs() < 1e-15);
        assert_eq!(mu_pair(&g, &truth, 0, 1).unwrap(), 1.0);
        assert_eq!(mu_pair(&g, &truth, 2, 3).unwrap(), 1.0);
    }

    #[test]
    fn graph_csv_round_trip() {
        let data = matrix(&[&[0.0], &[1.0], &[10.0]]);
        let g = knn_gaussian_weights(&data, 1, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        g.save_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("1,2,"), "1-based ids expected: {text}");
        let back = WeightGraph::load_csv(&path, 3).unwrap();
        assert_eq!(back.edge_count(), g.edge_count());
        for e in g.edges() {
            assert_eq!(back.weight(e.i, e.j), e.w);
        }
    }

    #[test]
    fn from_edges_validates() {
        assert!(WeightGraph::from_edges(3, vec![(0, 0, 1.0)]).is_err());
        assert!(WeightGraph::from_edges(3, vec![(0, 5, 1.0)]).is_err());
        assert!(WeightGraph::from_edges(3, vec![(0, 1, -0.5)]).is_err());
        assert!(WeightGraph::from_edges(3, vec![(0, 1, 1.0), (1, 0, 0.5)]).is_err());
        let _ = arr2(&[[0.0]]); // keep ndarray import exercised in tests
    }
}
