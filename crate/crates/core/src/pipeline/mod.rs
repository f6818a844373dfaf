//! The end-to-end analysis: incremental removal of the noisy band, the
//! performance and interpretation impact summaries, the two noisy-area
//! experiments and the JSON report.

pub mod experiments;
pub mod report;
pub mod run;
pub mod synthetic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::discretize::{class_counts, remove_window, window_grid, DiscretizationSpec, NoisyAreaSpec};
use crate::error::{Error, Result};
use crate::evalstats::bootstrap::{bootstrap_validate, BootstrapResult};
use crate::evalstats::rank_shift::{pool_rank_lists, rank_shift_likelihood};
use crate::evalstats::stattest::{
    cohens_d_one_sample, paired_comparison, wilcoxon_signed_rank, EffectLabel, StatTestResult,
};
use crate::evalstats::Measure;
use crate::learners::{tune, ClassifierKind, HyperParams, TuningGrid};
use crate::rng::{self, stream};

pub use experiments::{
    noisy_to_extremes_experiment, oversample_composition, oversample_experiment, NoisyToExtremes, OversampleConfig,
    OversampleRow,
};
pub use report::{validate_report, ImpactReport, SCHEMA_VERSION};
pub use run::{run_analysis, AnalysisOutcome, AnalysisSettings};
pub use synthetic::generate_synthetic;

pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalOptions {
    pub kind: ClassifierKind,
    pub n_boot: usize,
    pub seed: u64,
    pub grid: TuningGrid,
    /// Tune once on the whole dataset and reuse those parameters at every x.
    pub reuse_x0_params: bool,
}

impl IncrementalOptions {
    pub fn new(kind: ClassifierKind, n_boot: usize, seed: u64) -> Self {
        IncrementalOptions {
            kind,
            n_boot,
            seed,
            grid: TuningGrid::default(),
            reuse_x0_params: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalPoint {
    pub x_pct: f64,
    pub retained_n: usize,
    pub n_class1: usize,
    pub n_class2: usize,
    pub params: Option<HyperParams>,
    /// `None` when the retained data cannot support the analysis.
    pub boot: Option<BootstrapResult>,
    pub infeasible: Option<String>,
}

impl IncrementalPoint {
    pub fn is_feasible(&self) -> bool {
        self.boot.is_some()
    }
}

/// The grid `0, step, 2·step, …` up to the limit (inclusive).
pub fn incremental_grid(step_size_pct: f64, limit_pct: Option<f64>) -> Vec<f64> {
    let mut xs = vec![0.0];
    if let Some(limit) = limit_pct {
        xs.extend(window_grid(step_size_pct).into_iter().filter(|x| *x <= limit + 1e-9));
    }
    xs
}

fn is_data_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InsufficientClass { .. } | Error::ResampleExhausted(_) | Error::SingleClassTruth | Error::EmptyDataset
    )
}

pub fn incremental_analysis(
    dataset: &Dataset,
    spec: &DiscretizationSpec,
    noisy: &NoisyAreaSpec,
    kind: ClassifierKind,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<IncrementalPoint>> {
    incremental_analysis_with(dataset, spec, noisy, &IncrementalOptions::new(kind, n_boot, seed))
}

/// Every x shares `opts.seed`, so bootstrap iteration `i` draws from the same
/// substream at each x and the paired tests pair like with like.
pub fn incremental_analysis_with(
    dataset: &Dataset,
    spec: &DiscretizationSpec,
    noisy: &NoisyAreaSpec,
    opts: &IncrementalOptions,
) -> Result<Vec<IncrementalPoint>> {
    if spec.labels.len() != dataset.n_rows() {
        return Err(Error::LengthMismatch {
            expected: dataset.n_rows(),
            actual: spec.labels.len(),
        });
    }
    let xs = incremental_grid(noisy.step_size_pct, noisy.limit_pct());
    let mut points = Vec::with_capacity(xs.len());
    let mut x0_params: Option<HyperParams> = None;
    for (k, &x) in xs.iter().enumerate() {
        let (data, labels) = if k == 0 {
            (dataset.clone(), spec.labels.clone())
        } else {
            match remove_window(dataset, &spec.labels, spec.cutpoint, x) {
                Ok(v) => v,
                Err(e) => {
                    points.push(IncrementalPoint {
                        x_pct: x,
                        retained_n: 0,
                        n_class1: 0,
                        n_class2: 0,
                        params: None,
                        boot: None,
                        infeasible: Some(e.to_string()),
                    });
                    continue;
                }
            }
        };
        let (c1, c2) = class_counts(&labels);
        let mut point = IncrementalPoint {
            x_pct: x,
            retained_n: data.n_rows(),
            n_class1: c1,
            n_class2: c2,
            params: None,
            boot: None,
            infeasible: None,
        };
        let params = match (&x0_params, opts.reuse_x0_params) {
            (Some(p), true) => Ok(p.clone()),
            _ => tune(opts.kind, data.features(), &labels, &opts.grid, opts.seed),
        };
        let outcome = params.and_then(|params| {
            let boot = bootstrap_validate(opts.kind, data.features(), &labels, &params, opts.n_boot, opts.seed)?;
            Ok((params, boot))
        });
        match outcome {
            Ok((params, boot)) => {
                if k == 0 {
                    x0_params = Some(params.clone());
                }
                point.params = Some(params);
                point.boot = Some(boot);
            }
            Err(e) if k > 0 && is_data_error(&e) => point.infeasible = Some(e.to_string()),
            Err(e) => return Err(e),
        }
        points.push(point);
    }
    Ok(points)
}

pub fn median(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Test of one measure at one x against x = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepComparison {
    pub x_pct: f64,
    pub measure: Measure,
    pub median: f64,
    pub test: StatTestResult,
    pub significant: bool,
    /// Direction of the change in the measure's own sense (lower Brier is
    /// better).
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceImpact {
    pub measure: Measure,
    /// Signed change of the median from x = 0 to the limit, in percent; the
    /// Brier sign is flipped so that positive always means better.
    pub magnitude_pct: f64,
    /// Smallest x with a significant, non-negligible change; 0 if none.
    pub x_first: f64,
    pub p_value: f64,
    pub cohens_d: f64,
    pub effect_label: EffectLabel,
    pub median_at_0: f64,
    pub median_at_limit: f64,
    pub limit_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Recommendation {
    UseWholeDataset,
    Discard { x_pct: f64 },
}

impl Recommendation {
    pub fn describe(&self) -> String {
        match self {
            Recommendation::UseWholeDataset => "use whole dataset".to_string(),
            Recommendation::Discard { x_pct } => format!("discard {x_pct}% around the cutpoint"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactSummary {
    pub impacts: Vec<PerformanceImpact>,
    pub comparisons: Vec<StepComparison>,
    pub recommendation: Recommendation,
}

fn compare(base: &BootstrapResult, other: &BootstrapResult, x: f64, m: Measure) -> Result<StepComparison> {
    let a = other.measure(m);
    let b = base.measure(m);
    let test = paired_comparison(&a, &b)?;
    let significant = test.p_value <= ALPHA && test.effect_label != EffectLabel::Negligible;
    let up = test.cohens_d > 0.0;
    Ok(StepComparison {
        x_pct: x,
        measure: m,
        median: median(&a),
        test,
        significant,
        improved: up == m.higher_is_better(),
    })
}

/// Compare every feasible x against x = 0 per measure, pairing bootstrap
/// iterations by index.
pub fn performance_impact(points: &[IncrementalPoint]) -> Result<ImpactSummary> {
    let Some(base) = points.first().and_then(|p| p.boot.as_ref()) else {
        return Err(Error::invalid("the x = 0 point must be feasible"));
    };
    let later: Vec<&IncrementalPoint> = points[1..].iter().filter(|p| p.is_feasible()).collect();
    let mut comparisons = Vec::new();
    for p in &later {
        let boot = p.boot.as_ref().expect("feasible");
        if boot.n_boot() != base.n_boot() {
            return Err(Error::LengthMismatch {
                expected: base.n_boot(),
                actual: boot.n_boot(),
            });
        }
        for m in Measure::ALL {
            comparisons.push(compare(base, boot, p.x_pct, m)?);
        }
    }
    let mut impacts = Vec::new();
    if let Some(last) = later.last() {
        let limit = last.x_pct;
        for m in Measure::ALL {
            let per_x: Vec<&StepComparison> = comparisons.iter().filter(|c| c.measure == m).collect();
            let first = per_x.iter().find(|c| c.significant);
            let at_limit = per_x.last().expect("non-empty");
            let shown = first.unwrap_or(at_limit);
            let m0 = median(&base.measure(m));
            let ml = at_limit.median;
            let mut magnitude = if m0 != 0.0 { 100.0 * (ml - m0) / m0.abs() } else { 0.0 };
            if !m.higher_is_better() {
                magnitude = -magnitude;
            }
            impacts.push(PerformanceImpact {
                measure: m,
                magnitude_pct: magnitude,
                x_first: first.map_or(0.0, |c| c.x_pct),
                p_value: shown.test.p_value,
                cohens_d: shown.test.cohens_d,
                effect_label: shown.test.effect_label,
                median_at_0: m0,
                median_at_limit: ml,
                limit_pct: limit,
            });
        }
    }
    let recommendation = recommend(&later, &comparisons);
    Ok(ImpactSummary {
        impacts,
        comparisons,
        recommendation,
    })
}

/// Among x > 0 where some measure improves significantly and none degrades
/// significantly, pick the best median AUC (smallest x on ties).
fn recommend(later: &[&IncrementalPoint], comparisons: &[StepComparison]) -> Recommendation {
    let mut best: Option<(f64, f64)> = None;
    for p in later {
        let here: Vec<&StepComparison> = comparisons.iter().filter(|c| c.x_pct == p.x_pct).collect();
        let gains = here.iter().any(|c| c.significant && c.improved);
        let losses = here.iter().any(|c| c.significant && !c.improved);
        if gains && !losses {
            let auc = here
                .iter()
                .find(|c| c.measure == Measure::Auc)
                .map_or(f64::NEG_INFINITY, |c| c.median);
            if best.is_none_or(|(_, b)| auc > b) {
                best = Some((p.x_pct, auc));
            }
        }
    }
    match best {
        Some((x, _)) => Recommendation::Discard { x_pct: x },
        None => Recommendation::UseWholeDataset,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationImpact {
    pub limit_pct: f64,
    pub ranks_at_0: BTreeMap<String, usize>,
    pub ranks_at_limit: BTreeMap<String, usize>,
    /// Per feature, in column order: rank at 0 minus rank at the limit
    /// (absolute values in absolute mode).
    pub rank_differences: Vec<f64>,
    pub absolute_differences: bool,
    pub overall_p: f64,
    pub overall_statistic: f64,
    pub overall_d: f64,
    pub effect_label: EffectLabel,
    /// Nominal rank → likelihood that the feature holding it shifts.
    pub rank_shift: BTreeMap<usize, f64>,
    /// Nominal rank → feature name.
    pub rank_shift_features: BTreeMap<usize, String>,
}

/// Compare the Scott-Knott ranks at x = 0 with those at the largest feasible
/// x, and estimate rank-shift likelihoods from the pooled per-iteration
/// ranks of both configurations.
pub fn interpretation_impact(
    points: &[IncrementalPoint],
    feature_names: &[String],
    top_k: usize,
    n_rep: usize,
    seed: u64,
    absolute: bool,
) -> Result<InterpretationImpact> {
    let base = points
        .first()
        .and_then(|p| p.boot.as_ref())
        .ok_or_else(|| Error::invalid("the x = 0 point must be feasible"))?;
    let last = points[1..]
        .iter()
        .rev()
        .find(|p| p.is_feasible())
        .ok_or_else(|| Error::invalid("interpretation impact needs a feasible point beyond x = 0"))?;
    let lboot = last.boot.as_ref().expect("feasible");
    if feature_names.len() != base.feature_ranks.len() {
        return Err(Error::LengthMismatch {
            expected: base.feature_ranks.len(),
            actual: feature_names.len(),
        });
    }
    let diffs: Vec<f64> = base
        .feature_ranks
        .iter()
        .zip(&lboot.feature_ranks)
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            if absolute {
                d.abs()
            } else {
                d
            }
        })
        .collect();
    let w = wilcoxon_signed_rank(&diffs, &vec![0.0; diffs.len()])?;
    let d = if diffs.len() >= 2 { cohens_d_one_sample(&diffs)? } else { 0.0 };

    let lists0 = base.iteration_ranks();
    let lists1 = lboot.iteration_ranks();
    let pooled = pool_rank_lists(lists0.iter().chain(&lists1))?;
    let shift = rank_shift_likelihood(&pooled, n_rep, top_k, rng::derive_seed(seed, stream::INTERPRETATION, 0))?;

    let named = |ranks: &[usize]| -> BTreeMap<String, usize> {
        feature_names.iter().cloned().zip(ranks.iter().copied()).collect()
    };
    Ok(InterpretationImpact {
        limit_pct: last.x_pct,
        ranks_at_0: named(&base.feature_ranks),
        ranks_at_limit: named(&lboot.feature_ranks),
        rank_differences: diffs,
        absolute_differences: absolute,
        overall_p: w.p_value,
        overall_statistic: w.statistic,
        overall_d: d,
        effect_label: EffectLabel::from_d(d),
        rank_shift: shift.likelihood,
        rank_shift_features: shift
            .nominal_feature
            .into_iter()
            .map(|(r, f)| (r, feature_names[f].clone()))
            .collect(),
    })
}
