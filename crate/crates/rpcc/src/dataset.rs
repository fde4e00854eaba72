//! Synthetic Gaussian-mixture generation and CSV ingestion/emission for
//! data matrices and label vectors.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A collection of `n` points in `d` dimensions; row `i` is point `a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    /// Wrap an `n x d` matrix. All entries must be finite, `n >= 1`, `d >= 1`.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Validation(vec![format!(
                "data matrix must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )]));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(vec![format!(
                "non-finite entry at flat index {bad}"
            )]));
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> ndarray::ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// Squared Euclidean distance between rows `i` and `j`.
    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        let a = self.values.row(i);
        let b = self.values.row(j);
        a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    /// Mean of all rows (the grand mean `a^(0)`).
    pub fn grand_mean(&self) -> Array1<f64> {
        self.values.mean_axis(ndarray::Axis(0)).unwrap()
    }
}

/// A cluster assignment of `n` points. Labels are 1-based and every label
/// in `1..=k` is used by at least one point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Build from 1-based labels; every label in `1..=max` must occur.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation(vec!["partition of zero points".into()]));
        }
        let k = *labels.iter().max().unwrap();
        if k == 0 {
            return Err(Error::Validation(vec!["labels must be 1-based".into()]));
        }
        let mut seen = vec![false; k];
        for &l in &labels {
            if l == 0 || l > k {
                return Err(Error::Validation(vec![format!("label {l} out of range")]));
            }
            seen[l - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(vec![format!(
                "cluster {} is empty",
                missing + 1
            )]));
        }
        Ok(Self { labels, k })
    }

    /// Build from arbitrary label values, re-indexed to `1..=K` in order of
    /// first appearance.
    pub fn from_raw<T: PartialEq + Clone>(raw: &[T]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Validation(vec!["partition of zero points".into()]));
        }
        let mut reps: Vec<T> = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        for v in raw {
            let id = match reps.iter().position(|r| r == v) {
                Some(p) => p,
                None => {
                    reps.push(v.clone());
                    reps.len() - 1
                }
            };
            labels.push(id + 1);
        }
        Ok(Self {
            k: reps.len(),
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of distinct clusters.
    pub fn k(&self) -> usize {
        self.k
    }

    /// 1-based label of point `i` (0-based index).
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The index sets `I_alpha`: element `alpha - 1` lists the 0-based
    /// point indices of cluster `alpha`.
    pub fn cluster_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(i);
        }
        out
    }

    /// Cluster sizes `n_alpha`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.k];
        for &l in &self.labels {
            out[l - 1] += 1;
        }
        out
    }

    /// Relabel so clusters are numbered by first appearance.
    pub fn canonical(&self) -> Partition {
        Partition::from_raw(&self.labels).unwrap()
    }

    /// True when both describe the same set partition, regardless of how
    /// the clusters are numbered.
    pub fn same_clustering(&self, other: &Partition) -> bool {
        self.n() == other.n() && self.canonical().labels == other.canonical().labels
    }
}

/// Specification of a mixture of spherical Gaussians `N(mu_k, sigma_k^2 I_d)`.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    pub d: usize,
    pub k: usize,
    /// Component means; `k` vectors in `R^d`, pairwise distinct.
    pub means: Vec<Array1<f64>>,
    /// Per-component variances `sigma_k^2`. Zero is allowed and produces
    /// exact means, which is useful for analytic fixtures.
    pub variances: Vec<f64>,
    /// Mixing probabilities, summing to 1.
    pub mix_weights: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

impl MixtureSpec {
    /// Equal-weight mixture with shared variance and the standard-basis
    /// means produced by [`basis_means`].
    pub fn balanced_basis(d: usize, k: usize, sigma_sq: f64, n: usize, seed: u64) -> Self {
        Self {
            d,
            k,
            means: basis_means(d, k),
            variances: vec![sigma_sq; k],
            mix_weights: vec![1.0 / k as f64; k],
            n,
            seed,
        }
    }

    /// Check every invariant, listing all violations.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.d == 0 {
            bad.push("d must be >= 1".to_string());
        }
        if self.k == 0 {
            bad.push("k must be >= 1".to_string());
        }
        if self.n == 0 {
            bad.push("n must be >= 1".to_string());
        }
        if self.means.len() != self.k {
            bad.push(format!("means: expected {} vectors, got {}", self.k, self.means.len()));
        }
        if self.variances.len() != self.k {
            bad.push(format!(
                "variances: expected {} values, got {}",
                self.k,
                self.variances.len()
            ));
        }
        if self.mix_weights.len() != self.k {
            bad.push(format!(
                "mix_weights: expected {} values, got {}",
                self.k,
                self.mix_weights.len()
            ));
        }
        for (i, m) in self.means.iter().enumerate() {
            if m.len() != self.d {
                bad.push(format!("means[{i}]: dimension {} != d = {}", m.len(), self.d));
            }
        }
        for (i, &v) in self.variances.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                bad.push(format!("variances[{i}] = {v} must be finite and >= 0"));
            }
        }
        for (i, &w) in self.mix_weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                bad.push(format!("mix_weights[{i}] = {w} must be finite and >= 0"));
            }
        }
        let sum: f64 = self.mix_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            bad.push(format!("mix_weights sum to {sum}, expected 1 within 1e-12"));
        }
        for i in 0..self.means.len() {
            for j in (i + 1)..self.means.len() {
                if self.means[i] == self.means[j] {
                    bad.push(format!("means[{i}] and means[{j}] coincide"));
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }
}

/// Distinct mean vectors built from scaled standard-basis vectors: mean `j`
/// (0-based) is `(floor(j/d) + 1) * e_{j mod d}`. For `k <= d` this is just
/// `e_1, ..., e_k`.
pub fn basis_means(d: usize, k: usize) -> Vec<Array1<f64>> {
    (0..k)
        .map(|j| {
            let mut v = Array1::zeros(d);
            v[j % d] = (j / d + 1) as f64;
            v
        })
        .collect()
}

/// Draw a sample from the mixture. Labels are assigned deterministically in
/// blocks when every `n * w_k` is integral (balanced mode); otherwise each
/// point's component is sampled from the mixing weights. The result is
/// bit-identical across runs with the same spec.
pub fn generate_mixture(spec: &MixtureSpec) -> Result<(DataMatrix, Partition)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let balanced: Option<Vec<usize>> = {
        let counts: Vec<f64> = spec.mix_weights.iter().map(|w| w * spec.n as f64).collect();
        if counts.iter().all(|c| (c - c.round()).abs() < 1e-6) {
            let rounded: Vec<usize> = counts.iter().map(|c| c.round() as usize).collect();
            (rounded.iter().sum::<usize>() == spec.n).then_some(rounded)
        } else {
            None
        }
    };
    let labels: Vec<usize> = match balanced {
        Some(counts) => counts
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| std::iter::repeat(k + 1).take(c))
            .collect(),
        None => {
            let dist = WeightedIndex::new(&spec.mix_weights)
                .map_err(|e| Error::Parameter(format!("mix_weights: {e}")))?;
            (0..spec.n).map(|_| dist.sample(&mut rng) + 1).collect()
        }
    };
    let data = sample_points(&labels, &spec.means, &spec.variances, spec.d, &mut rng);
    Ok((DataMatrix::new(data)?, Partition::new(labels)?))
}

fn sample_points(
    labels: &[usize],
    means: &[Array1<f64>],
    variances: &[f64],
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    let n = labels.len();
    let mut data = Array2::zeros((n, d));
    for (i, &l) in labels.iter().enumerate() {
        let mu = &means[l - 1];
        let sigma = variances[l - 1].sqrt();
        let mut row = data.row_mut(i);
        for (j, x) in row.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *x = mu[j] + sigma * z;
        }
    }
    data
}

/// The unbalanced benchmark mixture: 20 spherical Gaussians `N(mu_k, 0.005 I_d)`
/// with 2000 samples in each of the first three clusters and 100 in each of
/// the remaining seventeen, 7700 points in total.
pub fn unbalanced_fixture() -> (DataMatrix, Partition) {
    unbalanced_fixture_with(2000, 0)
}

/// [`unbalanced_fixture`] with a configurable dimension and seed.
pub fn unbalanced_fixture_with(d: usize, seed: u64) -> (DataMatrix, Partition) {
    let k = 20;
    let counts: Vec<usize> = (0..k).map(|i| if i < 3 { 2000 } else { 100 }).collect();
    let labels: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat(i + 1).take(c))
        .collect();
    let means = basis_means(d, k);
    let variances = vec![0.005; k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = sample_points(&labels, &means, &variances, d, &mut rng);
    (
        DataMatrix::new(data).unwrap(),
        Partition::new(labels).unwrap(),
    )
}

/// Load a data matrix (and labels, when `has_labels` takes the last column
/// as integer cluster ids) from a comma-separated file with no header.
pub fn load_csv(path: &Path, has_labels: bool) -> Result<(DataMatrix, Option<Partition>)> {
    load_csv_with(path, has_labels, false)
}

/// [`load_csv`] with an option to skip one header line.
pub fn load_csv_with(
    path: &Path,
    has_labels: bool,
    skip_header: bool,
) -> Result<(DataMatrix, Option<Partition>)> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<i64> = Vec::new();
    let mut arity: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let row_no = idx + 1;
        if skip_header && idx == 0 {
            continue;
        }
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        match arity {
            None => arity = Some(cells.len()),
            Some(a) if a != cells.len() => {
                return Err(Error::Parse {
                    row: row_no,
                    message: format!("expected {a} columns, found {}", cells.len()),
                })
            }
            _ => {}
        }
        let ncols = cells.len();
        let data_cols = if has_labels { ncols - 1 } else { ncols };
        if has_labels && ncols < 2 {
            return Err(Error::Parse {
                row: row_no,
                message: "need at least one feature column besides the label".into(),
            });
        }
        let mut row = Vec::with_capacity(data_cols);
        for cell in &cells[..data_cols] {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: row_no,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            row.push(v);
        }
        if has_labels {
            let cell = cells[ncols - 1].trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row_no,
                message: format!("non-numeric label {cell:?}"),
            })?;
            if v.fract() != 0.0 {
                return Err(Error::Parse {
                    row: row_no,
                    message: format!("label {cell:?} is not an integer"),
                });
            }
            raw_labels.push(v as i64);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            row: 0,
            message: "empty file".into(),
        });
    }
    let n = rows.len();
    let d = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((n, d), flat)
        .map_err(|e| Error::Shape(format!("csv reshape: {e}")))?;
    let data = DataMatrix::new(values)?;
    let part = if has_labels {
        Some(Partition::from_raw(&raw_labels)?)
    } else {
        None
    };
    Ok((data, part))
}

/// Write a data matrix as CSV, appending the 1-based label as a last column
/// when a partition is given. Floats are emitted with enough digits to
/// round-trip exactly.
pub fn save_csv(data: &DataMatrix, labels: Option<&Partition>, path: &Path) -> Result<()> {
    if let Some(p) = labels {
        if p.n() != data.n() {
            return Err(Error::Shape(format!(
                "labels cover {} points, data has {}",
                p.n(),
                data.n()
            )));
        }
    }
    let mut out = String::new();
    for i in 0..data.n() {
        let mut first = true;
        for v in data.row(i) {
            if !first {
                out.push(',');
            }
            write!(out, "{v:?}").unwrap();
            first = false;
        }
        if let Some(p) = labels {
            write!(out, ",{}", p.label(i)).unwrap();
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr1;

    fn two_blob_spec() -> MixtureSpec {
        MixtureSpec {
            d: 2,
            k: 2,
            means: vec![arr1(&[0.0, 0.0]), arr1(&[10.0, 0.0])],
            variances: vec![1e-6, 1e-6],
            mix_weights: vec![0.5, 0.5],
            n: 4,
            seed: 7,
        }
    }

    #[test]
    fn balanced_mode_gives_exact_counts_and_tight_points() {
        let (data, part) = generate_mixture(&two_blob_spec()).unwrap();
        assert_eq!(part.labels(), &[1, 1, 2, 2]);
        let means = [[0.0, 0.0], [10.0, 0.0]];
        for i in 0..4 {
            let mu = means[part.label(i) - 1];
            let dev = ((data.values()[[i, 0]] - mu[0]).powi(2)
                + (data.values()[[i, 1]] - mu[1]).powi(2))
            .sqrt();
            assert!(dev <= 1e-2, "point {i} deviates {dev}");
        }
    }

    #[test]
    fn generation_is_bit_identical_per_seed() {
        let (a1, p1) = generate_mixture(&two_blob_spec()).unwrap();
        let (a2, p2) = generate_mixture(&two_blob_spec()).unwrap();
        assert_eq!(a1.values(), a2.values());
        assert_eq!(p1.labels(), p2.labels());
    }

    #[test]
    fn zero_variance_yields_exact_means() {
        let spec = MixtureSpec {
            d: 3,
            k: 1,
            means: vec![arr1(&[0.0, 0.0, 0.0])],
            variances: vec![0.0],
            mix_weights: vec![1.0],
            n: 5,
            seed: 1,
        };
        let (data, part) = generate_mixture(&spec).unwrap();
        assert_eq!(part.k(), 1);
        assert!(data.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_spec_lists_violations() {
        let mut spec = two_blob_spec();
        spec.mix_weights = vec![0.7, 0.5];
        spec.variances = vec![-1.0, 1.0];
        let err = generate_mixture(&spec).unwrap_err();
        match err {
            Error::Validation(v) => {
                assert!(v.iter().any(|s| s.contains("mix_weights sum")));
                assert!(v.iter().any(|s| s.contains("variances[0]")));
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn cluster_sizes_divide_evenly() {
        let spec = MixtureSpec::balanced_basis(5, 4, 0.01, 100, 3);
        let (_, part) = generate_mixture(&spec).unwrap();
        assert_eq!(part.sizes(), vec![25, 25, 25, 25]);
    }

    #[test]
    fn recovered_cluster_means_converge() {
        // For n_k >= 200, |mean - mu_k| <= 5 sigma sqrt(d / n_k).
        let spec = MixtureSpec::balanced_basis(10, 2, 0.05, 500, 11);
        let (data, part) = generate_mixture(&spec).unwrap();
        let idx = part.cluster_indices();
        for (k, members) in idx.iter().enumerate() {
            let mut mean = Array1::<f64>::zeros(10);
            for &i in members {
                mean += &data.row(i);
            }
            mean /= members.len() as f64;
            let diff = (&mean - &spec.means[k]).mapv(|v| v * v).sum().sqrt();
            let budget = 5.0 * spec.variances[k].sqrt() * (10.0 / members.len() as f64).sqrt();
            assert!(diff <= budget, "cluster {k}: {diff} > {budget}");
        }
    }

    #[test]
    fn within_cluster_distances_concentrate() {
        // Pairwise squared distances inside one spherical component sit
        // near 2 d sigma^2.
        let spec = MixtureSpec::balanced_basis(2000, 1, 0.005, 60, 5);
        let (data, _) = generate_mixture(&spec).unwrap();
        let expected = 2.0 * 2000.0 * 0.005;
        let mut total = 0.0;
        let mut count = 0usize;
        for i in 0..data.n() {
            for j in (i + 1)..data.n() {
                total += data.sq_dist(i, j);
                count += 1;
            }
        }
        let avg = total / count as f64;
        assert!((avg - expected).abs() / expected < 0.05, "avg {avg}");
    }

    #[test]
    fn unbalanced_fixture_has_documented_shape() {
        let (data, part) = unbalanced_fixture_with(10, 0);
        assert_eq!(data.n(), 7700);
        assert_eq!(data.d(), 10);
        assert_eq!(part.k(), 20);
        let sizes = part.sizes();
        assert_eq!(&sizes[..3], &[2000, 2000, 2000]);
        assert!(sizes[3..].iter().all(|&s| s == 100));
        assert_eq!(sizes.iter().sum::<usize>(), 7700);
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let spec = MixtureSpec::balanced_basis(3, 2, 0.5, 10, 9);
        let (data, part) = generate_mixture(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        save_csv(&data, Some(&part), &path).unwrap();
        let (back, back_part) = load_csv(&path, true).unwrap();
        assert_eq!(back.values(), data.values());
        assert_eq!(back_part.unwrap().labels(), part.labels());
    }

    #[test]
    fn parses_plain_matrix() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "1,2\n3,4\n5,6\n").unwrap();
        let (data, part) = load_csv(&path, false).unwrap();
        assert_eq!((data.n(), data.d()), (3, 2));
        assert!(part.is_none());
    }

    #[test]
    fn labels_reindex_by_first_appearance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "1,2,7\n3,4,3\n").unwrap();
        let (_, part) = load_csv(&path, true).unwrap();
        assert_eq!(part.unwrap().labels(), &[1, 2]);
    }

    #[test]
    fn parse_error_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "1,x\n").unwrap();
        match load_csv(&path, false).unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 1),
            other => panic!("unexpected error {other}"),
        }
        fs::write(&path, "").unwrap();
        assert!(load_csv(&path, false).is_err());
        fs::write(&path, "1,2\n3\n").unwrap();
        match load_csv(&path, false).unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other}"),
        }
    }
}
