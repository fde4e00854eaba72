//! Regularization-path sweeps: solve along a descending grid of fusion
//! strengths with warm starts, score each point against the ground truth,
//! and detect perfect recovery and coarsenings.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::bounds::GammaInterval;
use crate::dataset::{DataMatrix, Partition};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, adjusted_rand_index, rand_index};
use crate::solver::{extract_partition, EdgeSplitSolver, SolverSettings};
use crate::weights::WeightGraph;

/// One solved grid point.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub gamma: f64,
    pub k_found: usize,
    pub partition: Partition,
    pub rand_index: Option<f64>,
    pub adjusted_rand_index: Option<f64>,
    pub accuracy: Option<f64>,
    pub rel_gap: f64,
    pub converged: bool,
}

/// Where a path came from: enough to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct PathProvenance {
    /// Hash of the data matrix and edge list.
    pub instance_hash: u64,
    pub settings: SolverSettings,
}

/// A clustering path: points ordered by strictly descending gamma.
#[derive(Debug, Clone)]
pub struct ClusteringPath {
    pub points: Vec<PathPoint>,
    pub grid: Vec<f64>,
    pub provenance: PathProvenance,
}

impl ClusteringPath {
    /// The point at the given gamma, if it is on the grid.
    pub fn at(&self, gamma: f64) -> Option<&PathPoint> {
        self.points.iter().find(|p| p.gamma == gamma)
    }
}

/// Expand a MATLAB-style `start:step:end` grid description, inclusive of
/// both ends when the step divides the span. `"10:-0.1:0.1"` yields the
/// 100-point descending grid.
pub fn parse_grid(desc: &str) -> Result<Vec<f64>> {
    let trimmed = desc.trim().trim_start_matches('[').trim_end_matches(']');
    let parts: Vec<&str> = trimmed.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parameter(format!(
            "grid {desc:?} must have the form start:step:end"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad grid number {p:?}")))
        })
        .collect::<Result<_>>()?;
    expand_grid(nums[0], nums[1], nums[2])
}

/// Numeric version of [`parse_grid`].
pub fn expand_grid(start: f64, step: f64, end: f64) -> Result<Vec<f64>> {
    if step == 0.0 || !step.is_finite() {
        return Err(Error::Parameter(format!("grid step {step} must be nonzero")));
    }
    if (end - start) * step < 0.0 {
        return Err(Error::Parameter(format!(
            "grid step {step} walks away from end {end}"
        )));
    }
    let count = ((end - start) / step + 1.0 + 1e-9).floor() as usize;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn hash_instance(data: &DataMatrix, graph: &WeightGraph) -> u64 {
    let mut h = DefaultHasher::new();
    data.n().hash(&mut h);
    data.d().hash(&mut h);
    for v in data.values() {
        v.to_bits().hash(&mut h);
    }
    for e in graph.edges() {
        e.i.hash(&mut h);
        e.j.hash(&mut h);
        e.w.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Solve at every grid gamma (descending, warm-started) and score each
/// extracted partition against the truth when given. Non-convergent points
/// are recorded with their achieved gap and the sweep continues.
pub fn sweep(
    data: &DataMatrix,
    graph: &WeightGraph,
    grid: &[f64],
    truth: Option<&Partition>,
    settings: &SolverSettings,
) -> Result<ClusteringPath> {
    if grid.is_empty() {
        return Err(Error::Parameter("gamma grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
        return Err(Error::Parameter(format!("grid gamma {bad} must be >= 0")));
    }
    if let Some(t) = truth {
        if t.n() != data.n() {
            return Err(Error::Shape(format!(
                "truth covers {} points, data has {}",
                t.n(),
                data.n()
            )));
        }
    }
    let mut gammas: Vec<f64> = grid.to_vec();
    gammas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    gammas.dedup();

    let mut solver = EdgeSplitSolver::new(data, graph, settings)?;
    let mut points = Vec::with_capacity(gammas.len());
    for &gamma in &gammas {
        let res = solver.solve_gamma(gamma, true)?;
        let partition = extract_partition(&res);
        let (ri, ari, acc) = match truth {
            Some(t) => (
                Some(rand_index(&partition, t)?),
                Some(adjusted_rand_index(&partition, t)?),
                Some(accuracy(&partition, t)?),
            ),
            None => (None, None, None),
        };
        points.push(PathPoint {
            gamma,
            k_found: partition.k(),
            partition,
            rand_index: ri,
            adjusted_rand_index: ari,
            accuracy: acc,
            rel_gap: res.rel_gap,
            converged: res.success,
        });
    }
    Ok(ClusteringPath {
        points,
        grid: gammas,
        provenance: PathProvenance {
            instance_hash: hash_instance(data, graph),
            settings: *settings,
        },
    })
}

/// Result of scanning a path for ground-truth recovery.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    /// Grid gammas whose partition equals the truth as a set partition.
    pub perfect_gammas: Vec<f64>,
    /// Filled when an interval was supplied.
    pub interval: Option<IntervalRecovery>,
}

/// Recovery statistics restricted to grid points inside an interval.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalRecovery {
    pub inside_count: usize,
    pub inside_perfect: usize,
    /// Every grid point inside the interval recovered the truth. Holds
    /// vacuously when the grid misses the interval; check `vacuous`.
    pub all_inside_perfect: bool,
    pub vacuous: bool,
}

/// Find the grid gammas that recover the truth exactly, and optionally
/// whether the whole grid-interval intersection does.
pub fn detect_perfect_recovery(
    path: &ClusteringPath,
    truth: &Partition,
    interval: Option<&GammaInterval>,
) -> RecoveryReport {
    let perfect_gammas: Vec<f64> = path
        .points
        .iter()
        .filter(|p| p.partition.same_clustering(truth))
        .map(|p| p.gamma)
        .collect();
    let interval = interval.map(|iv| {
        let inside: Vec<&PathPoint> = path
            .points
            .iter()
            .filter(|p| iv.contains(p.gamma))
            .collect();
        let inside_perfect = inside
            .iter()
            .filter(|p| p.partition.same_clustering(truth))
            .count();
        IntervalRecovery {
            inside_count: inside.len(),
            inside_perfect,
            all_inside_perfect: inside_perfect == inside.len(),
            vacuous: inside.is_empty(),
        }
    });
    RecoveryReport {
        perfect_gammas,
        interval,
    }
}

/// Whether `candidate` merges whole truth clusters only (every truth
/// cluster lands in a single candidate cluster), and whether that
/// coarsening is non-trivial (more than one candidate cluster).
pub fn is_coarsening(candidate: &Partition, truth: &Partition) -> Result<(bool, bool)> {
    if candidate.n() != truth.n() {
        return Err(Error::Shape(format!(
            "partitions cover {} and {} points",
            candidate.n(),
            truth.n()
        )));
    }
    let mut image: Vec<Option<usize>> = vec![None; truth.k()];
    let mut coarsening = true;
    for i in 0..truth.n() {
        let t = truth.label(i) - 1;
        let c = candidate.label(i);
        match image[t] {
            None => image[t] = Some(c),
            Some(prev) if prev != c => {
                coarsening = false;
                break;
            }
            _ => {}
        }
    }
    Ok((coarsening, coarsening && candidate.k() > 1))
}
