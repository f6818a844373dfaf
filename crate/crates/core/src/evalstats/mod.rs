//! Performance measures, the out-of-sample bootstrap and the statistics used
//! to compare configurations and rank features.

pub mod bootstrap;
pub mod metrics;
pub mod rank_shift;
pub mod scott_knott;
pub mod stattest;

pub use bootstrap::{bootstrap_validate, iteration_ranks, BootstrapResult};
pub use metrics::{auc, perf_measures, Measure, PerfFlags, PerfVector};
pub use rank_shift::{rank_shift_likelihood, RankShift};
pub use scott_knott::{scott_knott_esd, scott_knott_esd_named};
pub use stattest::{
    cohens_d, cohens_d_one_sample, mann_whitney, wilcoxon_signed_rank, EffectLabel, StatTestResult, WilcoxonResult,
};
