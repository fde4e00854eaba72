//! Weighted convex clustering (sum-of-norms clustering) and its randomly
//! projected variant, together with the recovery-guarantee calculus that
//! relates the two: data-dependent regularization bounds, random-projection
//! embedding dimensions, distortion thresholds, and sub-gaussian
//! singular-value bounds.
//!
//! The pieces fit together as a pipeline:
//!
//! 1. [`dataset`] generates or loads an `n x d` data matrix with optional
//!    ground-truth labels.
//! 2. [`weights`] builds a sparse symmetric fusion-weight graph (k-NN
//!    Gaussian kernel, uniform, or k-NN augmented with within-cluster
//!    cliques) and checks the in-cluster weight condition.
//! 3. [`projection`] samples `m x d` random projection matrices, computes
//!    embedding dimensions, and verifies distortion bounds empirically.
//! 4. [`bounds`] evaluates the regularization interval `[gamma_min,
//!    gamma_max)` that guarantees perfect recovery, on original or embedded
//!    data, plus the distortion thresholds under which projection preserves
//!    that interval.
//! 5. [`solver`] minimizes the convex clustering objective by ADMM to a
//!    certified relative duality gap and extracts the induced partition.
//! 6. [`path`] sweeps the regularization strength over a grid with warm
//!    starts and scores each point against the ground truth.
//! 7. [`metrics`] and [`baseline`] provide Rand index / adjusted Rand index /
//!    accuracy and a Lloyd's K-means reference.
//!
//! The `rpcc` binary wires these into reproducible, config-driven
//! experiments; see [`cli`]. Runnable walkthroughs of each capability live
//! in the crate's `examples/` directory.

// Guards written as `!(x > 0.0)` intentionally reject NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod bounds;
pub mod cli;
pub mod dataset;
pub mod error;
mod linalg;
pub mod metrics;
pub mod path;
pub mod projection;
pub mod solver;
pub mod weights;

pub use crate::dataset::{DataMatrix, MixtureSpec, Partition};
pub use crate::error::{Error, Result};
pub use crate::projection::{ProjectionMatrix, SubgaussianProfile};
pub use crate::solver::{ProblemInstance, SolveResult, SolverSettings};
pub use crate::weights::WeightGraph;

/// Two 1-D clusters {0, 1} and {10, 11} under uniform weights: the smallest
/// fixture on which every recovery quantity has a closed form.
#[cfg(test)]
pub(crate) fn build_test_fixture_4pt() -> (DataMatrix, WeightGraph, Partition) {
    let data = DataMatrix::new(
        ndarray::Array2::from_shape_vec((4, 1), vec![0.0, 1.0, 10.0, 11.0]).unwrap(),
    )
    .unwrap();
    let graph = weights::uniform_weights(4).unwrap();
    let truth = Partition::new(vec![1, 1, 2, 2]).unwrap();
    (data, graph, truth)
}
