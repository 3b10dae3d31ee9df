//! Minimax surrogate-loss estimation of conditional treatment-effect signs.
//!
//! The central piece is [`causal_svm`]: a single kernelized convex QP over
//! treatment and control units whose solution `h(x)` is thresholded at `±θ`
//! into positive / neutral / negative effect predictions. The remaining
//! modules supply the data model, kernels, a dense interior-point QP solver,
//! density-ratio weights, ground-truth evaluation, synthetic benchmarks,
//! difference-of-two-models baselines, generalization-bound calculators and
//! cross-validated model selection.

pub mod baselines;
pub mod bounds;
pub mod causal_svm;
pub mod cli;
pub mod cv;
pub mod domain;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod io;
pub mod kernels;
mod logistic;
pub mod qp;
pub mod surrogate;
pub mod synthetic;
pub mod weights;

pub use error::{Error, Result};
