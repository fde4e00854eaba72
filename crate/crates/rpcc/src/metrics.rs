//! Partition-agreement measures: Rand index, adjusted Rand index, and
//! best-matching accuracy.

use crate::dataset::Partition;
use crate::error::{Error, Result};

/// Cross-tabulation of two partitions: `counts[a][b]` is the number of
/// points with label `a+1` in the first partition and `b+1` in the second.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn new(p1: &Partition, p2: &Partition) -> Result<Self> {
        if p1.n() != p2.n() {
            return Err(Error::Shape(format!(
                "partitions cover {} and {} points",
                p1.n(),
                p2.n()
            )));
        }
        let (k1, k2) = (p1.k(), p2.k());
        let mut counts = vec![vec![0usize; k2]; k1];
        for i in 0..p1.n() {
            counts[p1.label(i) - 1][p2.label(i) - 1] += 1;
        }
        let row_sums: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
        let mut col_sums = vec![0usize; k2];
        for r in &counts {
            for (j, &c) in r.iter().enumerate() {
                col_sums[j] += c;
            }
        }
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: p1.n(),
        })
    }
}

fn choose2(n: usize) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Fraction of unordered point pairs on which the two partitions agree
/// (same cluster in both, or different in both).
pub fn rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(p1, p2)?;
    if t.n < 2 {
        return Err(Error::Parameter("rand index needs n >= 2".into()));
    }
    let pairs = choose2(t.n);
    let sum_cells: f64 = t
        .counts
        .iter()
        .flat_map(|r| r.iter())
        .map(|&c| choose2(c))
        .sum();
    let sum_rows: f64 = t.row_sums.iter().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = t.col_sums.iter().map(|&c| choose2(c)).sum();
    let agreements = pairs - (sum_rows + sum_cols - 2.0 * sum_cells);
    Ok(agreements / pairs)
}

/// Chance-corrected Rand index in the Hubert-Arabie form. Equals 1 exactly
/// when the partitions coincide; centered at 0 for independent labelings.
pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(p1, p2)?;
    if t.n < 2 {
        return Err(Error::Parameter("adjusted rand index needs n >= 2".into()));
    }
    let pairs = choose2(t.n);
    let index: f64 = t
        .counts
        .iter()
        .flat_map(|r| r.iter())
        .map(|&c| choose2(c))
        .sum();
    let sum_rows: f64 = t.row_sums.iter().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = t.col_sums.iter().map(|&c| choose2(c)).sum();
    // Cross-multiplied form: every term is a product of pair counts, so the
    // arithmetic stays exact in f64 up to very large n and simple fixtures
    // come out as exact rationals.
    let numerator = pairs * index - sum_rows * sum_cols;
    let denominator = pairs * 0.5 * (sum_rows + sum_cols) - sum_rows * sum_cols;
    if denominator == 0.0 {
        // Both partitions trivial and equal; agreement is perfect.
        return Ok(1.0);
    }
    Ok(numerator / denominator)
}

/// Ratio of correctly clustered points under the best injective matching of
/// cluster labels, found by optimal assignment on the contingency table.
pub fn accuracy(p1: &Partition, truth: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(p1, truth)?;
    let matched = best_matching_total(&t.counts);
    Ok(matched as f64 / t.n as f64)
}

/// Maximum total count over injective row-to-column matchings.
fn best_matching_total(counts: &[Vec<usize>]) -> usize {
    let k1 = counts.len();
    let k2 = counts[0].len();
    // Orient so rows <= columns, then run min-cost assignment on negated
    // counts.
    let (rows, cols, get): (usize, usize, Box<dyn Fn(usize, usize) -> f64>) = if k1 <= k2 {
        (k1, k2, Box::new(|i, j| -(counts[i][j] as f64)))
    } else {
        (k2, k1, Box::new(|i, j| -(counts[j][i] as f64)))
    };
    let total = -min_cost_assignment(rows, cols, |i, j| get(i, j));
    total.round() as usize
}

/// Shortest-augmenting-path assignment (Hungarian with potentials) for a
/// rectangular cost matrix with `rows <= cols`. Returns the optimal total
/// cost.
fn min_cost_assignment(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64) -> f64 {
    assert!(rows <= cols);
    let inf = f64::INFINITY;
    let mut u = vec![0.0f64; rows + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut matched = vec![0usize; cols + 1]; // row matched to each column (1-based, 0 = free)
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0.0;
    for j in 1..=cols {
        if matched[j] != 0 {
            total += cost(matched[j] - 1, j - 1);
        }
    }
    total
}
