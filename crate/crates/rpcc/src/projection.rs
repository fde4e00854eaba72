//! Random projection matrices, embedding-dimension formulas, empirical
//! distortion verification on difference sets, closed-form probability
//! bounds, and sub-gaussian singular-value bounds.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataMatrix, Partition};
use crate::error::{Error, Result};
use crate::linalg;

/// Entry distribution of the unscaled random matrix. Both families have
/// zero mean, unit variance, and sub-gaussian tails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Rademacher,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gaussian => write!(f, "gaussian"),
            Family::Rademacher => write!(f, "rademacher"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "rademacher" | "sign" => Ok(Family::Rademacher),
            other => Err(Error::Parameter(format!("unknown family {other:?}"))),
        }
    }
}

/// An `m x d` random projection `Pi = R / sqrt(m)` with its sampling
/// metadata.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    m: usize,
    d: usize,
    values: Array2<f64>,
    family: Family,
    seed: u64,
}

/// Sidecar metadata serialized next to the matrix CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionMeta {
    pub m: usize,
    pub d: usize,
    pub family: Family,
    pub seed: u64,
}

impl ProjectionMatrix {
    /// Wrap an explicit matrix (used for injected test isometries).
    pub fn from_matrix(values: Array2<f64>, family: Family, seed: u64) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Parameter("projection must be at least 1x1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("projection has non-finite entries".into()));
        }
        Ok(Self {
            m: values.nrows(),
            d: values.ncols(),
            values,
            family,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Pi x` for a single vector.
    pub fn project_vec(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.d {
            return Err(Error::Shape(format!(
                "vector has dimension {}, projection expects {}",
                x.len(),
                self.d
            )));
        }
        Ok(self.values.dot(x))
    }

    /// Embed a whole data matrix: row `i` of the result is `Pi a_i`.
    pub fn project_data(&self, data: &DataMatrix) -> Result<DataMatrix> {
        if data.d() != self.d {
            return Err(Error::Shape(format!(
                "data has dimension {}, projection expects {}",
                data.d(),
                self.d
            )));
        }
        DataMatrix::new(data.values().dot(&self.values.t()))
    }

    pub fn meta(&self) -> ProjectionMeta {
        ProjectionMeta {
            m: self.m,
            d: self.d,
            family: self.family,
            seed: self.seed,
        }
    }

    /// Write the matrix as CSV (m rows, d columns) plus a JSON sidecar.
    pub fn save(&self, csv_path: &Path, meta_path: &Path) -> Result<()> {
        let mut out = String::new();
        for row in self.values.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                write!(out, "{v:?}").unwrap();
                first = false;
            }
            out.push('\n');
        }
        fs::write(csv_path, out)?;
        fs::write(meta_path, serde_json::to_string_pretty(&self.meta())?)?;
        Ok(())
    }
}

/// Sample `Pi = R / sqrt(m)` with i.i.d. entries from the family.
/// Bit-identical across runs with the same arguments.
pub fn sample_projection(m: usize, d: usize, family: Family, seed: u64) -> Result<ProjectionMatrix> {
    if m == 0 || d == 0 {
        return Err(Error::Parameter(format!(
            "projection dimensions must be positive, got {m}x{d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (m as f64).sqrt();
    let mut values = Array2::zeros((m, d));
    for v in values.iter_mut() {
        let g: f64 = match family {
            Family::Gaussian => rng.sample(StandardNormal),
            Family::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        *v = scale * g;
    }
    Ok(ProjectionMatrix {
        m,
        d,
        values,
        family,
        seed,
    })
}

fn check_distortion(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "distortion epsilon = {epsilon} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// `ceil(C * eps^-2 * ln n)`: the embedding dimension that preserves all
/// pairwise distances among `n` points within distortion `eps`.
pub fn embedding_dim_logn(epsilon: f64, n: usize, c: f64) -> Result<usize> {
    check_distortion(epsilon)?;
    if n < 2 {
        return Err(Error::Parameter(format!("n = {n} must be >= 2")));
    }
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("C = {c} must be positive")));
    }
    Ok((c * epsilon.powi(-2) * (n as f64).ln()).ceil() as usize)
}

/// `ceil(C * eps^-2 * ln K)`: the cluster-count variant, independent of the
/// number of points.
pub fn embedding_dim_logk(epsilon: f64, k: usize, c: f64) -> Result<usize> {
    check_distortion(epsilon)?;
    if k < 2 {
        return Err(Error::Parameter(format!("K = {k} must be >= 2")));
    }
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("C = {c} must be positive")));
    }
    Ok((c * epsilon.powi(-2) * (k as f64).ln()).ceil() as usize)
}

/// The two vector families whose squared norms must survive projection:
/// all within-cluster differences `a_i - a_j` (grouped by cluster) and all
/// centroid differences, with the grand mean included as centroid 0.
#[derive(Debug, Clone)]
pub struct DifferenceSets {
    within_pairs: Vec<Vec<(usize, usize)>>,
    /// Rows: grand mean, then the K cluster centroids.
    centroids: Array2<f64>,
    n1: usize,
    n2: usize,
}

impl DifferenceSets {
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Within-cluster index pairs, grouped by cluster.
    pub fn within_pairs(&self) -> &[Vec<(usize, usize)>] {
        &self.within_pairs
    }

    /// Centroid rows (grand mean first).
    pub fn centroids(&self) -> &Array2<f64> {
        &self.centroids
    }

    /// Materialize the centroid differences (N2 vectors).
    pub fn centroid_diffs(&self) -> Vec<Array1<f64>> {
        let k1 = self.centroids.nrows();
        let mut out = Vec::with_capacity(self.n2);
        for a in 0..k1 {
            for b in (a + 1)..k1 {
                out.push(&self.centroids.row(a) - &self.centroids.row(b));
            }
        }
        out
    }

    /// Materialize the within-cluster differences (N1 vectors).
    pub fn within_diffs(&self, data: &DataMatrix) -> Vec<Array1<f64>> {
        let mut out = Vec::with_capacity(self.n1);
        for pairs in &self.within_pairs {
            for &(i, j) in pairs {
                out.push(&data.row(i) - &data.row(j));
            }
        }
        out
    }

    /// All N1 + N2 vectors: within-cluster differences then centroid
    /// differences.
    pub fn all_diffs(&self, data: &DataMatrix) -> Vec<Array1<f64>> {
        let mut out = self.within_diffs(data);
        out.extend(self.centroid_diffs());
        out
    }
}

/// Collect the difference sets for a labeled data matrix.
pub fn build_difference_sets(data: &DataMatrix, truth: &Partition) -> Result<DifferenceSets> {
    if truth.n() != data.n() {
        return Err(Error::Shape(format!(
            "partition covers {} points, data has {}",
            truth.n(),
            data.n()
        )));
    }
    let idx = truth.cluster_indices();
    let mut within_pairs = Vec::with_capacity(idx.len());
    let mut n1 = 0usize;
    for members in &idx {
        let mut pairs = Vec::with_capacity(members.len() * members.len().saturating_sub(1) / 2);
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[(a + 1)..] {
                pairs.push((i, j));
            }
        }
        n1 += pairs.len();
        within_pairs.push(pairs);
    }
    let k = truth.k();
    let d = data.d();
    let mut centroids = Array2::zeros((k + 1, d));
    centroids.row_mut(0).assign(&data.grand_mean());
    for (c, members) in idx.iter().enumerate() {
        let mut mean = Array1::<f64>::zeros(d);
        for &i in members {
            mean += &data.row(i);
        }
        mean /= members.len() as f64;
        centroids.row_mut(c + 1).assign(&mean);
    }
    let n2 = (k + 1) * k / 2;
    Ok(DifferenceSets {
        within_pairs,
        centroids,
        n1,
        n2,
    })
}

/// Outcome of checking squared-norm preservation on a set of vectors.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryReport {
    pub epsilon: f64,
    pub total: usize,
    pub preserved: usize,
    pub fraction: f64,
    pub all_preserved: bool,
    /// `(index, ratio)` of each violating vector, where ratio is the
    /// projected-to-original squared-norm ratio.
    pub violations: Vec<(usize, f64)>,
}

/// Core distortion check on `(original, projected)` squared-norm pairs.
/// Zero vectors count as preserved.
pub fn isometry_from_sq_norms(
    pairs: impl Iterator<Item = (f64, f64)>,
    epsilon: f64,
) -> Result<IsometryReport> {
    check_distortion(epsilon)?;
    let mut total = 0usize;
    let mut preserved = 0usize;
    let mut violations = Vec::new();
    for (idx, (orig, proj)) in pairs.enumerate() {
        total += 1;
        if orig == 0.0 {
            preserved += 1;
            continue;
        }
        let lo = (1.0 - epsilon) * orig;
        let hi = (1.0 + epsilon) * orig;
        if proj >= lo && proj <= hi {
            preserved += 1;
        } else {
            violations.push((idx, proj / orig));
        }
    }
    let fraction = if total == 0 {
        1.0
    } else {
        preserved as f64 / total as f64
    };
    Ok(IsometryReport {
        epsilon,
        total,
        preserved,
        fraction,
        all_preserved: preserved == total,
        violations,
    })
}

/// Check `(1 - eps)|x|^2 <= |Pi x|^2 <= (1 + eps)|x|^2` for each vector.
pub fn verify_isometry(
    pi: &ProjectionMatrix,
    vectors: &[Array1<f64>],
    epsilon: f64,
) -> Result<IsometryReport> {
    check_distortion(epsilon)?;
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != pi.d() {
            return Err(Error::Shape(format!(
                "vector {i} has dimension {}, projection expects {}",
                v.len(),
                pi.d()
            )));
        }
    }
    let pairs = vectors.iter().map(|v| {
        let orig = v.iter().map(|x| x * x).sum::<f64>();
        let p = pi.values().dot(v);
        let proj = p.iter().map(|x| x * x).sum::<f64>();
        (orig, proj)
    });
    isometry_from_sq_norms(pairs, epsilon)
}

/// The union-bound success probability `1 - (sum of set sizes) * delta` for
/// jointly preserving several vector sets.
pub fn union_bound_probability(set_sizes: &[usize], delta: f64) -> Result<f64> {
    let total: usize = set_sizes.iter().sum();
    if total == 0 {
        return Err(Error::Parameter("need at least one vector".into()));
    }
    if !(delta > 0.0 && delta < 1.0 / total as f64) {
        return Err(Error::Parameter(format!(
            "delta = {delta} must lie in (0, {})",
            1.0 / total as f64
        )));
    }
    Ok(1.0 - total as f64 * delta)
}

/// Conditional probability that the centroid differences survive given that
/// the data differences did: the `1 - N2 / ((N1 + N2)^p - N1)` bound, and,
/// when `n` is supplied, the `1 - 1 / (n^p - n + 1)` form.
pub fn conditional_recovery_probability(
    n1: usize,
    n2: usize,
    p: f64,
    n: Option<usize>,
) -> Result<(f64, Option<f64>)> {
    if !(p > 1.0) {
        return Err(Error::Parameter(format!("p = {p} must be > 1")));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::Parameter("N1 and N2 must be >= 1".into()));
    }
    let n1f = n1 as f64;
    let n2f = n2 as f64;
    let general = 1.0 - n2f / ((n1f + n2f).powf(p) - n1f);
    let with_n = n.map(|n| {
        let nf = n as f64;
        1.0 - 1.0 / (nf.powf(p) - nf + 1.0)
    });
    Ok((general, with_n))
}

/// Deviation profile for the sub-gaussian singular-value bounds: the
/// constant `C_kappa^2` and the tail parameter `t`. The default matches the
/// Gaussian family instantiation `C_kappa^2 = 1`, `t = 2`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SubgaussianProfile {
    pub c_kappa_sq: f64,
    pub t: f64,
}

impl Default for SubgaussianProfile {
    fn default() -> Self {
        Self {
            c_kappa_sq: 1.0,
            t: 2.0,
        }
    }
}

impl SubgaussianProfile {
    pub fn new(c_kappa_sq: f64, t: f64) -> Result<Self> {
        if !(c_kappa_sq > 0.0) {
            return Err(Error::Parameter(format!(
                "c_kappa_sq = {c_kappa_sq} must be positive"
            )));
        }
        if !(t >= 0.0) {
            return Err(Error::Parameter(format!("t = {t} must be >= 0")));
        }
        Ok(Self { c_kappa_sq, t })
    }
}

/// Two-sided singular-value envelope for an `m x d` scaled sub-gaussian
/// matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularBounds {
    /// `(sqrt(d) - C_kappa^2 t) / sqrt(m) - C_kappa^2`; may be negative.
    pub lower: f64,
    /// `(sqrt(d) + C_kappa^2 t) / sqrt(m) + C_kappa^2`.
    pub upper: f64,
}

/// Closed-form upper and lower singular-value bounds.
pub fn singular_bounds(m: usize, d: usize, profile: &SubgaussianProfile) -> Result<SingularBounds> {
    if m > d {
        return Err(Error::Parameter(format!(
            "m = {m} must not exceed d = {d}"
        )));
    }
    if m == 0 {
        return Err(Error::Parameter("m must be >= 1".into()));
    }
    SubgaussianProfile::new(profile.c_kappa_sq, profile.t)?;
    let sm = (m as f64).sqrt();
    let sd = (d as f64).sqrt();
    let ck = profile.c_kappa_sq;
    let t = profile.t;
    Ok(SingularBounds {
        lower: (sd - ck * t) / sm - ck,
        upper: (sd + ck * t) / sm + ck,
    })
}

/// Extreme singular values of the projection, via the eigenvalues of the
/// `m x m` Gram matrix. Full decomposition up to `m = 512`, iterative
/// extremes (1e-10 residual tolerance) beyond.
pub fn extreme_singular_values(pi: &ProjectionMatrix) -> (f64, f64) {
    let gram = pi.values().dot(&pi.values().t());
    let (hi, lo) = if pi.m() <= 512 {
        let eigs = linalg::sym_eigenvalues(&gram);
        (eigs[eigs.len() - 1], eigs[0])
    } else {
        linalg::extreme_eigs_iterative(&gram, 1e-10)
    };
    (hi.max(0.0).sqrt(), lo.max(0.0).sqrt())
}

/// Whether the projection's singular values fall inside the closed-form
/// envelope.
pub fn check_singular_bounds(pi: &ProjectionMatrix, profile: &SubgaussianProfile) -> Result<bool> {
    let bounds = singular_bounds(pi.m(), pi.d(), profile)?;
    let (s_max, s_min) = extreme_singular_values(pi);
    Ok(bounds.lower <= s_min && s_max <= bounds.upper)
}
