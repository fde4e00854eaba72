//! JSON experiment configuration: one file per experiment, all randomness
//! behind explicit seeds.

use std::path::PathBuf;

use serde::Deserialize;

use crate::dataset::{self, DataMatrix, MixtureSpec, Partition};
use crate::error::{Error, Result};
use crate::path::parse_grid;
use crate::projection::Family;
use crate::solver::{SolverSettings, TauMerge};
use crate::weights::{self, WeightGraph};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<DatasetConfig>,
    pub weights: Option<WeightsConfig>,
    pub projection: Option<ProjectionConfig>,
    /// Regularization strength for single solves.
    pub gamma: Option<f64>,
    /// Gamma grid for path sweeps: `"10:-0.2:2"` or an explicit list.
    pub grid: Option<GridSpec>,
    pub solver: Option<SolverConfig>,
    pub bounds: Option<BoundsConfig>,
    pub kmeans: Option<KMeansSection>,
    pub compare: Option<CompareConfig>,
    /// Output root; overridden by `--out`.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetConfig {
    /// Balanced-by-default mixture of spherical Gaussians.
    Mixture {
        d: usize,
        k: usize,
        sigma_sq: f64,
        n: usize,
        #[serde(default)]
        seed: u64,
        /// `"basis"` (default) or explicit mean vectors.
        means: Option<MeansSpec>,
        /// Defaults to equal weights.
        mix_weights: Option<Vec<f64>>,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        has_labels: bool,
        #[serde(default)]
        header: bool,
    },
    /// The 7700-point unbalanced benchmark (three large clusters,
    /// seventeen small ones).
    Unbalanced {
        #[serde(default = "default_unbalanced_d")]
        d: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_unbalanced_d() -> usize {
    2000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MeansSpec {
    Named(String),
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    /// `knn`, `oracle`, or `uniform`.
    pub mode: String,
    pub k: Option<usize>,
    /// Kernel scale; defaults to `1/d`.
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProjectionConfig {
    /// `gaussian` (default) or `rademacher`.
    pub family: Option<String>,
    /// Explicit embedding dimension; otherwise derived from `epsilon`.
    pub m: Option<usize>,
    pub epsilon: Option<f64>,
    /// Distortions to scan in `verify-jl`.
    pub epsilons: Option<Vec<f64>>,
    /// Constant in the embedding-dimension formula (default 9).
    pub c: Option<f64>,
    /// `logn` (default) or `logk` dimension rule.
    pub dim_rule: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Independent samples for `verify-jl`.
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Desc(String),
    Values(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Desc(s) => parse_grid(s),
            GridSpec::Values(v) => {
                if v.is_empty() {
                    Err(Error::Parameter("grid list is empty".into()))
                } else {
                    Ok(v.clone())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: Option<f64>,
    pub rho: Option<f64>,
    pub max_iter: Option<usize>,
    /// Fixed merge tolerance; default is median-edge-length scaling.
    pub tau_merge: Option<f64>,
}

impl SolverConfig {
    pub fn settings(&self) -> SolverSettings {
        let base = SolverSettings::default();
        SolverSettings {
            tol: self.tol.unwrap_or(base.tol),
            rho: self.rho.unwrap_or(base.rho),
            max_iter: self.max_iter.unwrap_or(base.max_iter),
            tau_merge: match self.tau_merge {
                Some(t) => TauMerge::Fixed(t),
                None => base.tau_merge,
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    /// Probability exponent for the union/conditional bounds.
    pub p: Option<f64>,
    /// Constant for the log-n thresholds (default 9).
    pub c_logn: Option<f64>,
    /// Constant for the log-K thresholds (default 10).
    pub c_logk: Option<f64>,
    pub c_kappa_sq: Option<f64>,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct KMeansSection {
    /// Defaults to the ground-truth cluster count when labels exist.
    pub k: Option<usize>,
    pub max_iter: Option<usize>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Embedding dimensions to test.
    pub ms: Vec<usize>,
    /// Independent projections per dimension.
    pub trials: usize,
}

impl ExperimentConfig {
    /// Build the configured dataset. `seed_override` replaces every
    /// configured seed when set (the `--seed` flag).
    pub fn build_dataset(
        &self,
        seed_override: Option<u64>,
    ) -> Result<(DataMatrix, Option<Partition>)> {
        let ds = self
            .dataset
            .as_ref()
            .ok_or_else(|| Error::Validation(vec!["dataset: section missing".into()]))?;
        match ds {
            DatasetConfig::Mixture {
                d,
                k,
                sigma_sq,
                n,
                seed,
                means,
                mix_weights,
            } => {
                let means = match means {
                    None | Some(MeansSpec::Named(_)) => dataset::basis_means(*d, *k),
                    Some(MeansSpec::Explicit(rows)) => rows
                        .iter()
                        .map(|r| ndarray::Array1::from_vec(r.clone()))
                        .collect(),
                };
                let spec = MixtureSpec {
                    d: *d,
                    k: *k,
                    means,
                    variances: vec![*sigma_sq; *k],
                    mix_weights: mix_weights
                        .clone()
                        .unwrap_or_else(|| vec![1.0 / *k as f64; *k]),
                    n: *n,
                    seed: seed_override.unwrap_or(*seed),
                };
                let (data, part) = dataset::generate_mixture(&spec)?;
                Ok((data, Some(part)))
            }
            DatasetConfig::Csv {
                path,
                has_labels,
                header,
            } => dataset::load_csv_with(path, *has_labels, *header),
            DatasetConfig::Unbalanced { d, seed } => {
                let (data, part) =
                    dataset::unbalanced_fixture_with(*d, seed_override.unwrap_or(*seed));
                Ok((data, Some(part)))
            }
        }
    }

    /// Build the configured weight graph on the dataset.
    pub fn build_graph(
        &self,
        data: &DataMatrix,
        truth: Option<&Partition>,
    ) -> Result<WeightGraph> {
        let wc = self
            .weights
            .as_ref()
            .ok_or_else(|| Error::Validation(vec!["weights: section missing".into()]))?;
        let phi = wc.phi.unwrap_or_else(|| weights::default_phi(data));
        match wc.mode.as_str() {
            "uniform" => weights::uniform_weights(data.n()),
            "knn" => weights::knn_gaussian_weights(data, wc.k.unwrap_or(10), phi),
            "oracle" => {
                let truth = truth.ok_or_else(|| {
                    Error::Validation(vec![
                        "weights.mode = oracle requires a labeled dataset".into()
                    ])
                })?;
                weights::oracle_experiment_graph(data, truth, wc.k.unwrap_or(10), phi)
            }
            other => Err(Error::Validation(vec![format!(
                "weights.mode: unknown mode {other:?} (expected knn, oracle, or uniform)"
            )])),
        }
    }

    pub fn projection_family(&self) -> Result<Family> {
        match &self.projection {
            Some(p) => p
                .family
                .as_deref()
                .unwrap_or("gaussian")
                .parse::<Family>(),
            None => Ok(Family::Gaussian),
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        self.solver.clone().unwrap_or_default().settings()
    }

    /// Collect every violated field for the sections a command requires.
    /// Returns the full list so a user can fix the config in one pass.
    pub fn validate(&self, needs: &Needs) -> Vec<String> {
        let mut bad = Vec::new();
        if needs.dataset {
            match &self.dataset {
                None => bad.push("dataset: section required".into()),
                Some(DatasetConfig::Csv { path, .. }) => {
                    if !path.exists() {
                        bad.push(format!("dataset.path: {} does not exist", path.display()));
                    }
                }
                Some(DatasetConfig::Mixture {
                    d,
                    k,
                    sigma_sq,
                    n,
                    mix_weights,
                    ..
                }) => {
                    if *d == 0 {
                        bad.push("dataset.d: must be >= 1".into());
                    }
                    if *k == 0 {
                        bad.push("dataset.k: must be >= 1".into());
                    }
                    if *n == 0 {
                        bad.push("dataset.n: must be >= 1".into());
                    }
                    if !(*sigma_sq >= 0.0) {
                        bad.push("dataset.sigma_sq: must be >= 0".into());
                    }
                    if let Some(w) = mix_weights {
                        if w.len() != *k {
                            bad.push(format!(
                                "dataset.mix_weights: {} entries for k = {k}",
                                w.len()
                            ));
                        }
                    }
                }
                Some(DatasetConfig::Unbalanced { d, .. }) => {
                    if *d == 0 {
                        bad.push("dataset.d: must be >= 1".into());
                    }
                }
            }
        }
        if needs.weights {
            match &self.weights {
                None => bad.push("weights: section required".into()),
                Some(w) => {
                    if !matches!(w.mode.as_str(), "knn" | "oracle" | "uniform") {
                        bad.push(format!("weights.mode: unknown mode {:?}", w.mode));
                    }
                    if let Some(phi) = w.phi {
                        if !(phi > 0.0) {
                            bad.push("weights.phi: must be positive".into());
                        }
                    }
                    if let Some(k) = w.k {
                        if k == 0 {
                            bad.push("weights.k: must be >= 1".into());
                        }
                    }
                }
            }
        }
        if needs.projection {
            match &self.projection {
                None => bad.push("projection: section required".into()),
                Some(p) => {
                    if let Some(f) = &p.family {
                        if f.parse::<Family>().is_err() {
                            bad.push(format!("projection.family: unknown family {f:?}"));
                        }
                    }
                    let eps_ok = |e: f64| e > 0.0 && e < 1.0;
                    if let Some(e) = p.epsilon {
                        if !eps_ok(e) {
                            bad.push("projection.epsilon: must lie in (0, 1)".into());
                        }
                    }
                    if let Some(es) = &p.epsilons {
                        if es.iter().any(|e| !eps_ok(*e)) {
                            bad.push("projection.epsilons: every value must lie in (0, 1)".into());
                        }
                    }
                    if p.m.is_none() && p.epsilon.is_none() && p.epsilons.is_none() {
                        bad.push("projection: needs either m or epsilon".into());
                    }
                    if let Some(c) = p.c {
                        if !(c > 0.0) {
                            bad.push("projection.c: must be positive".into());
                        }
                    }
                    if let Some(rule) = &p.dim_rule {
                        if !matches!(rule.as_str(), "logn" | "logk") {
                            bad.push(format!("projection.dim_rule: unknown rule {rule:?}"));
                        }
                    }
                }
            }
        }
        if needs.gamma && self.gamma.is_none() {
            bad.push("gamma: required".into());
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0) {
                bad.push("gamma: must be >= 0".into());
            }
        }
        if needs.grid {
            match &self.grid {
                None => bad.push("grid: required".into()),
                Some(g) => match g.values() {
                    Err(e) => bad.push(format!("grid: {e}")),
                    Ok(v) => {
                        if v.iter().any(|x| !(*x >= 0.0)) {
                            bad.push("grid: gammas must be >= 0".into());
                        }
                    }
                },
            }
        }
        if let Some(s) = &self.solver {
            if let Some(tol) = s.tol {
                if !(tol > 0.0) {
                    bad.push("solver.tol: must be positive".into());
                }
            }
            if let Some(rho) = s.rho {
                if !(rho > 0.0) {
                    bad.push("solver.rho: must be positive".into());
                }
            }
            if s.max_iter == Some(0) {
                bad.push("solver.max_iter: must be >= 1".into());
            }
        }
        if needs.compare {
            match &self.compare {
                None => bad.push("compare: section required".into()),
                Some(c) => {
                    if c.ms.is_empty() {
                        bad.push("compare.ms: must list at least one dimension".into());
                    }
                    if c.trials == 0 {
                        bad.push("compare.trials: must be >= 1".into());
                    }
                }
            }
        }
        if needs.kmeans && self.kmeans.is_none() && !needs.labels {
            bad.push("kmeans: section required (or a labeled dataset for k)".into());
        }
        bad
    }
}

/// Which configuration sections a command requires.
#[derive(Debug, Clone, Copy, Default)]
pub struct Needs {
    pub dataset: bool,
    pub weights: bool,
    pub projection: bool,
    pub gamma: bool,
    pub grid: bool,
    pub compare: bool,
    pub kmeans: bool,
    /// The command needs ground-truth labels at run time.
    pub labels: bool,
}
