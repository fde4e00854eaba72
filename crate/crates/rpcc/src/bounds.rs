//! The recovery-guarantee calculus: data-dependent regularization bounds
//! `gamma_min`, `gamma_max`, `gamma_max2` and their ratios on original or
//! embedded data, the distortion thresholds under which random projection
//! preserves the recovery interval, and the resulting intervals themselves.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::dataset::{DataMatrix, Partition};
use crate::error::{Error, Result};
use crate::projection::{singular_bounds, SubgaussianProfile};
use crate::weights::{check_assumption2, cluster_weight_masses, WeightGraph};

/// The five recovery quantities of the weighted model, with the argmax /
/// argmin diagnostics that attain them.
///
/// `gamma_max` and `gamma_max2` are `+inf` when they are undefined: a single
/// cluster, or a cluster with no weight mass toward the others.
#[derive(Debug, Clone)]
pub struct GammaBounds {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_max2: f64,
    /// `gamma_max / gamma_min`.
    pub r: f64,
    /// `gamma_max2 / gamma_min`.
    pub r2: f64,
    /// `(alpha, i, j)` attaining `gamma_min` (1-based cluster, 0-based points).
    pub arg_min: Option<(usize, usize, usize)>,
    /// `(alpha, beta)` attaining `gamma_max` (1-based clusters).
    pub arg_max: Option<(usize, usize)>,
    /// `alpha` attaining `gamma_max2` (1-based).
    pub arg_max2: Option<usize>,
}

fn centroid_rows(data: &DataMatrix, truth: &Partition) -> Array2<f64> {
    let k = truth.k();
    let d = data.d();
    let mut rows = Array2::zeros((k + 1, d));
    rows.row_mut(0).assign(&data.grand_mean());
    for (c, members) in truth.cluster_indices().iter().enumerate() {
        let mut mean = Array1::<f64>::zeros(d);
        for &i in members {
            mean += &data.row(i);
        }
        mean /= members.len() as f64;
        rows.row_mut(c + 1).assign(&mean);
    }
    rows
}

fn row_dist(rows: &Array2<f64>, a: usize, b: usize) -> f64 {
    rows.row(a)
        .iter()
        .zip(rows.row(b).iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Evaluate the recovery bounds on (possibly embedded) data. The weights
/// always come from the graph built on the original data; only distances
/// are read from `data`.
pub fn gamma_bounds(
    data: &DataMatrix,
    graph: &WeightGraph,
    truth: &Partition,
) -> Result<GammaBounds> {
    if graph.n() != data.n() || truth.n() != data.n() {
        return Err(Error::Shape(format!(
            "sizes disagree: data {}, graph {}, partition {}",
            data.n(),
            graph.n(),
            truth.n()
        )));
    }
    let report = check_assumption2(graph, truth);
    if !report.holds {
        return Err(Error::WeightAssumption(Box::new(report)));
    }
    let k = truth.k();
    let centroids = centroid_rows(data, truth);
    if k >= 2 {
        for a in 0..=k {
            for b in (a + 1)..=k {
                if centroids.row(a) == centroids.row(b) {
                    let name = |x: usize| {
                        if x == 0 {
                            "grand mean".to_string()
                        } else {
                            format!("centroid {x}")
                        }
                    };
                    return Err(Error::DuplicateCentroids(format!(
                        "{} equals {}",
                        name(a),
                        name(b)
                    )));
                }
            }
        }
    }

    let masses = cluster_weight_masses(graph, truth);
    let sizes = truth.sizes();
    let clusters = truth.cluster_indices();

    // gamma_min: worst within-cluster pair.
    let mut gamma_min = 0.0f64;
    let mut arg_min = None;
    for (c, members) in clusters.iter().enumerate() {
        let alpha = c + 1;
        let n_alpha = sizes[c] as f64;
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[(a + 1)..] {
                let w = graph.weight(i, j);
                let mu: f64 = masses[i * k..(i + 1) * k]
                    .iter()
                    .zip(&masses[j * k..(j + 1) * k])
                    .enumerate()
                    .filter(|(beta, _)| *beta != c)
                    .map(|(_, (x, y))| (x - y).abs())
                    .sum();
                let denom = n_alpha * w - mu;
                let value = data.sq_dist(i, j).sqrt() / denom;
                if value > gamma_min {
                    gamma_min = value;
                    arg_min = Some((alpha, i, j));
                }
            }
        }
    }

    // Cross-cluster weight masses w^(alpha, beta) and their row means.
    let mut cross = vec![0.0f64; k * k];
    for e in graph.edges() {
        let (la, lb) = (truth.label(e.i) - 1, truth.label(e.j) - 1);
        if la != lb {
            cross[la * k + lb] += e.w;
            cross[lb * k + la] += e.w;
        }
    }
    let w_bar: Vec<f64> = (0..k)
        .map(|b| cross[b * k..(b + 1) * k].iter().sum::<f64>() / sizes[b] as f64)
        .collect();

    let mut gamma_max = f64::INFINITY;
    let mut arg_max = None;
    for a in 0..k {
        for b in (a + 1)..k {
            let denom = w_bar[a] + w_bar[b];
            let value = if denom > 0.0 {
                row_dist(&centroids, a + 1, b + 1) / denom
            } else {
                f64::INFINITY
            };
            if value < gamma_max {
                gamma_max = value;
                arg_max = Some((a + 1, b + 1));
            }
        }
    }

    let mut gamma_max2 = if k == 1 { f64::INFINITY } else { 0.0 };
    let mut arg_max2 = None;
    if k >= 2 {
        for a in 0..k {
            let value = if w_bar[a] > 0.0 {
                row_dist(&centroids, 0, a + 1) / w_bar[a]
            } else {
                f64::INFINITY
            };
            if value > gamma_max2 {
                gamma_max2 = value;
                arg_max2 = Some(a + 1);
            }
        }
    }

    Ok(GammaBounds {
        gamma_min,
        gamma_max,
        gamma_max2,
        r: gamma_max / gamma_min,
        r2: gamma_max2 / gamma_min,
        arg_min,
        arg_max,
        arg_max2,
    })
}

/// [`gamma_bounds`] evaluated on embedded data. The graph (and therefore
/// every weight-derived quantity) must be the one computed on the original
/// data; the two models share their weights.
pub fn hat_gamma_bounds(
    embedded: &DataMatrix,
    graph: &WeightGraph,
    truth: &Partition,
) -> Result<GammaBounds> {
    gamma_bounds(embedded, graph, truth)
}

/// Which threshold family an [`EpsilonThresholds`] came from.
#[derive(Debug, Clone, Serialize)]
pub enum ThresholdVariant {
    /// Embedding dimension grows with `log n`.
    LogN { n: usize },
    /// Embedding dimension grows with `log K`; carries the constant `C0`
    /// and the deviation profile used.
    LogK {
        k: usize,
        c0: f64,
        profile: SubgaussianProfile,
    },
}

/// Distortion thresholds: projections with `eps` in `[eps_min, eps_sup)`
/// preserve the perfect-recovery interval (`eps_sup2` for coarsening).
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonThresholds {
    pub eps_min: f64,
    pub eps_sup: f64,
    pub eps_sup2: Option<f64>,
    pub variant: ThresholdVariant,
    /// Whether the clusterability ratio is large enough that
    /// `eps_min < eps_sup` is guaranteed.
    pub hypothesis_holds: bool,
    /// `eps_min < eps_sup` and `eps_min < 1`. When `C ln(n)/d >= 1` there is
    /// no valid distortion window at all.
    pub window_nonempty: bool,
}

fn check_ratio(r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("ratio r = {r} must be positive")));
    }
    Ok(())
}

fn eps_sup_from_ratio(r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else {
        (r * r - 1.0) / (r * r + 1.0)
    }
}

/// Thresholds for the `log n` embedding dimension. The absolute constant
/// of the dimension formula is supplied as `c`, so
/// `eps_min = sqrt(c ln(n) / d)`.
pub fn epsilon_thresholds_logn(
    r: f64,
    r2: Option<f64>,
    d: usize,
    n: usize,
    c: f64,
) -> Result<EpsilonThresholds> {
    check_ratio(r)?;
    if n < 2 {
        return Err(Error::Parameter(format!("n = {n} must be >= 2")));
    }
    if d == 0 {
        return Err(Error::Parameter("d must be >= 1".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("C = {c} must be positive")));
    }
    let eps_min = (c * (n as f64).ln() / d as f64).sqrt();
    let eps_sup = eps_sup_from_ratio(r);
    let eps_sup2 = r2.map(eps_sup_from_ratio);
    let hypothesis_holds =
        eps_min < 1.0 && r > ((1.0 + eps_min) / (1.0 - eps_min)).sqrt();
    Ok(EpsilonThresholds {
        eps_min,
        eps_sup,
        eps_sup2,
        variant: ThresholdVariant::LogN { n },
        hypothesis_holds,
        window_nonempty: eps_min < 1.0 && eps_min < eps_sup,
    })
}

fn eps_sup_logk(r: f64, c0: f64, ck: f64) -> f64 {
    let rc = r * c0;
    rc * (rc * rc / 4.0 + ck * c0 + 1.0).sqrt() - ck * c0 - rc * rc / 2.0
}

/// Thresholds for the `log K` embedding dimension, which routes the
/// distortion through the singular-value envelope of the projection:
/// `C0 = sqrt(C ln K) / (sqrt(d) + C_kappa^2 t)`.
pub fn epsilon_thresholds_logk(
    r: f64,
    r2: Option<f64>,
    d: usize,
    k: usize,
    c: f64,
    profile: &SubgaussianProfile,
) -> Result<EpsilonThresholds> {
    check_ratio(r)?;
    if k < 2 {
        return Err(Error::Parameter(format!("K = {k} must be >= 2")));
    }
    if d == 0 {
        return Err(Error::Parameter("d must be >= 1".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("C = {c} must be positive")));
    }
    SubgaussianProfile::new(profile.c_kappa_sq, profile.t)?;
    let ck = profile.c_kappa_sq;
    let sd = (d as f64).sqrt();
    let cln = c * (k as f64).ln();
    let c0 = cln.sqrt() / (sd + ck * profile.t);
    let eps_min = (cln / d as f64).sqrt();
    let eps_sup = if r.is_infinite() {
        1.0
    } else {
        eps_sup_logk(r, c0, ck)
    };
    let eps_sup2 = r2.map(|v| {
        if v.is_infinite() {
            1.0
        } else {
            eps_sup_logk(v, c0, ck)
        }
    });
    let hypothesis_holds =
        eps_min < 1.0 && r > (1.0 + ck + ck * profile.t / sd) / (1.0 - eps_min).sqrt();
    Ok(EpsilonThresholds {
        eps_min,
        eps_sup,
        eps_sup2,
        variant: ThresholdVariant::LogK {
            k,
            c0,
            profile: *profile,
        },
        hypothesis_holds,
        window_nonempty: eps_min < 1.0 && eps_min < eps_sup,
    })
}

/// Whether an interval guarantees exact recovery of the hidden partition or
/// only a merger of whole clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    PerfectRecovery,
    Coarsening,
}

/// A half-open regularization interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaInterval {
    pub lo: f64,
    pub hi: f64,
    pub nonempty: bool,
    pub kind: IntervalKind,
}

impl GammaInterval {
    pub fn contains(&self, gamma: f64) -> bool {
        self.nonempty && gamma >= self.lo && gamma < self.hi
    }
}

/// The interval `[sqrt(1+eps) gamma_min, sqrt(1-eps) gamma_max)` on which a
/// projection with distortion `eps` keeps the recovery guarantee
/// (`gamma_max2` for the coarsening kind).
pub fn recovery_interval_logn(
    gb: &GammaBounds,
    epsilon: f64,
    kind: IntervalKind,
) -> Result<GammaInterval> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon = {epsilon} must lie in (0, 1)"
        )));
    }
    let hi_base = match kind {
        IntervalKind::PerfectRecovery => gb.gamma_max,
        IntervalKind::Coarsening => gb.gamma_max2,
    };
    let lo = (1.0 + epsilon).sqrt() * gb.gamma_min;
    let hi = (1.0 - epsilon).sqrt() * hi_base;
    Ok(GammaInterval {
        lo,
        hi,
        nonempty: lo < hi,
        kind,
    })
}

/// The `log K` variant: the left endpoint is the singular-value upper bound
/// times `gamma_min`.
pub fn recovery_interval_logk(
    gb: &GammaBounds,
    epsilon: f64,
    m: usize,
    d: usize,
    profile: &SubgaussianProfile,
    kind: IntervalKind,
) -> Result<GammaInterval> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon = {epsilon} must lie in (0, 1)"
        )));
    }
    let bounds = singular_bounds(m, d, profile)?;
    let hi_base = match kind {
        IntervalKind::PerfectRecovery => gb.gamma_max,
        IntervalKind::Coarsening => gb.gamma_max2,
    };
    let lo = bounds.upper * gb.gamma_min;
    let hi = (1.0 - epsilon).sqrt() * hi_base;
    Ok(GammaInterval {
        lo,
        hi,
        nonempty: lo < hi,
        kind,
    })
}

/// The mild size condition `n > K (K + 1)` under which the count-based
/// probability forms apply.
pub fn check_assumption3(n: usize, k: usize) -> bool {
    n > k * (k + 1)
}
