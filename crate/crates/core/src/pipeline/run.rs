//! One full analysis from a loaded dataset to the report.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::experiments::{noisy_to_extremes_experiment, oversample_experiment, OversampleConfig};
use super::report::{
    DatasetSummary, DiscretizationSummary, ExperimentsReport, ExtremesSummary, ImpactReport, PointSummary, RunStatus,
    SCHEMA_VERSION,
};
use super::{
    incremental_analysis_with, interpretation_impact, performance_impact, IncrementalOptions, IncrementalPoint,
    Recommendation,
};
use crate::dataio::Dataset;
use crate::discretize::{discretize_with, estimate_noisy_area, extremes, NoisyAreaSpec, ThresholdMethod};
use crate::error::Result;
use crate::learners::{tune, ClassifierKind, TuningGrid};
use crate::preprocess::{reduce, DEFAULT_R2, DEFAULT_RHO};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub threshold_method: ThresholdMethod,
    /// Expert cutpoint; skips threshold estimation.
    pub cutpoint: Option<f64>,
    pub step_size_pct: f64,
    pub extremes_fraction: f64,
    pub classifier: ClassifierKind,
    pub n_boot: usize,
    pub top_k: usize,
    pub n_rep: usize,
    pub seed: u64,
    pub rho_threshold: f64,
    pub r2_threshold: f64,
    pub reuse_x0_params: bool,
    pub absolute_rank_diff: bool,
    pub experiments: bool,
    pub oversample: OversampleConfig,
    pub grid: TuningGrid,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            threshold_method: ThresholdMethod::Median,
            cutpoint: None,
            step_size_pct: 5.0,
            extremes_fraction: 0.1,
            classifier: ClassifierKind::RandomForest,
            n_boot: 100,
            top_k: 3,
            n_rep: 100,
            seed: 0,
            rho_threshold: DEFAULT_RHO,
            r2_threshold: DEFAULT_R2,
            reuse_x0_params: false,
            absolute_rank_diff: false,
            experiments: false,
            oversample: OversampleConfig::default(),
            grid: TuningGrid::default(),
        }
    }
}

pub struct AnalysisOutcome {
    pub report: ImpactReport,
    pub points: Vec<IncrementalPoint>,
    pub feature_names: Vec<String>,
    pub noisy: NoisyAreaSpec,
}

pub fn run_analysis(
    dataset: &Dataset,
    target_name: &str,
    settings: &AnalysisSettings,
    config_echo: Value,
) -> Result<AnalysisOutcome> {
    let (reduced, preprocessing) = reduce(dataset, settings.rho_threshold, settings.r2_threshold)?;
    let (cutpoint, method) = match settings.cutpoint {
        Some(c) => (c, None),
        None => (
            settings.threshold_method.threshold(reduced.target())?,
            Some(settings.threshold_method),
        ),
    };
    let spec = discretize_with(&reduced, cutpoint, method)?;
    let noisy = estimate_noisy_area(&reduced, cutpoint, settings.step_size_pct, settings.seed)?;
    let opts = IncrementalOptions {
        kind: settings.classifier,
        n_boot: settings.n_boot,
        seed: settings.seed,
        grid: settings.grid.clone(),
        reuse_x0_params: settings.reuse_x0_params,
    };
    let points = incremental_analysis_with(&reduced, &spec, &noisy, &opts)?;
    let names = reduced.feature_names().to_vec();
    let summary = performance_impact(&points)?;
    let any_later = points[1..].iter().any(|p| p.is_feasible());
    let interpretation = if any_later {
        Some(interpretation_impact(
            &points,
            &names,
            settings.top_k,
            settings.n_rep,
            settings.seed,
            settings.absolute_rank_diff,
        )?)
    } else {
        None
    };
    let status = if noisy.area.is_none() {
        RunStatus::NoNoisyArea
    } else if !any_later {
        RunStatus::NoFeasibleStep
    } else {
        RunStatus::Complete
    };

    let ext = extremes(reduced.target(), settings.extremes_fraction)?;
    let mut experiments = ExperimentsReport {
        extremes: Some(ExtremesSummary {
            fraction: ext.fraction,
            n_low: ext.low_indices.len(),
            n_high: ext.high_indices.len(),
        }),
        ..ExperimentsReport::default()
    };
    if settings.experiments {
        if let Some(area) = &noisy.area {
            experiments.oversample = Some(oversample_experiment(
                &reduced,
                &spec,
                area,
                &ext,
                settings.classifier,
                &settings.oversample,
                settings.n_boot,
                settings.seed,
                &settings.grid,
            )?);
            let area_rows = area.rows(reduced.target());
            let labels: Vec<_> = area_rows.iter().map(|&i| spec.labels[i]).collect();
            let rf = tune(
                ClassifierKind::RandomForest,
                &reduced.features().select_rows(&area_rows),
                &labels,
                &settings.grid,
                settings.seed,
            )?;
            experiments.noisy_to_extremes = Some(noisy_to_extremes_experiment(
                &reduced,
                &spec,
                area,
                &ext,
                &rf,
                settings.n_boot,
                settings.seed,
            )?);
        }
    }

    let report = ImpactReport {
        schema: SCHEMA_VERSION,
        status,
        dataset: DatasetSummary {
            source: dataset.source_path().to_string(),
            target: target_name.to_string(),
            n_rows: dataset.n_rows(),
            n_features: dataset.n_features(),
        },
        classifier: settings.classifier.code().to_string(),
        preprocessing,
        discretization: DiscretizationSummary::new(
            method.map_or_else(|| "expert".to_string(), |m| m.to_string()),
            cutpoint,
            spec.counts(),
            &noisy,
        ),
        incremental: points.iter().map(|p| PointSummary::new(p, &names)).collect(),
        performance_impacts: summary.impacts,
        recommendation: if status == RunStatus::Complete {
            summary.recommendation
        } else {
            Recommendation::UseWholeDataset
        },
        interpretation,
        experiments,
        config_echo,
        seed: settings.seed,
    };
    Ok(AnalysisOutcome {
        report,
        points,
        feature_names: names,
        noisy,
    })
}
