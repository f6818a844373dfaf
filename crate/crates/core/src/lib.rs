//! Measure how discretization noise affects binary classifiers.
//!
//! When a continuous outcome is split into two classes at an artificial
//! cutpoint, observations close to the cutpoint carry labels that are barely
//! distinguishable from the opposite class. This crate locates that noisy
//! band, removes it in increments, and reports how classifier performance and
//! feature-importance rankings respond.
//!
//! The modules follow the analysis flow:
//!
//! - [`dataio`]: CSV loading, Box-Cox transform, per-class quanta binning.
//! - [`preprocess`]: correlation and redundancy filtering of features.
//! - [`discretize`]: cutpoints (median, 1D 2-means, regression stump),
//!   labels, noisy-area estimation, extremes and window removal.
//! - [`complexity`]: F1, L2, N2 and N4 data complexity measures.
//! - [`learners`]: random forest, logistic regression, CART and KNN with
//!   tuning and default feature importances.
//! - [`evalstats`]: performance measures, out-of-sample bootstrap,
//!   Wilcoxon tests, Cohen's d, Scott-Knott ESD and rank-shift likelihood.
//! - [`pipeline`]: the incremental analysis, impact summaries, the
//!   oversampling experiments and a synthetic data generator.
//! - [`cli`]: configuration and commands behind the `noisegate` binary.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod complexity;
pub mod dataio;
pub mod discretize;
pub mod error;
pub mod evalstats;
pub mod learners;
pub mod matrix;
pub mod pipeline;
pub mod preprocess;
pub mod rng;

pub use dataio::Dataset;
pub use discretize::{Class, ClassLabels};
pub use error::{Error, Result};
pub use matrix::Matrix;
