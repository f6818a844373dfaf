//! Experiments on the noisy area: oversampling it next to the extremes, and
//! training on it alone while testing on the extremes.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::median;
use crate::dataio::Dataset;
use crate::discretize::{Class, DiscretizationSpec, ExtremesSpec, NoisyArea};
use crate::error::{Error, Result};
use crate::evalstats::bootstrap::MAX_REDRAWS;
use crate::evalstats::metrics::auc;
use crate::learners::{train, tune, ClassifierKind, HyperParams, TuningGrid};
use crate::rng::{self, stream, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversampleConfig {
    pub over_sample_pcts: Vec<u32>,
}

impl Default for OversampleConfig {
    fn default() -> Self {
        OversampleConfig {
            over_sample_pcts: vec![0, 100, 200, 300],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversampleRow {
    pub over_sample_pct: u32,
    /// Training rows before bootstrapping the extremes.
    pub n_train: usize,
    pub noisy_share: f64,
    pub median_auc: f64,
    /// Median AUC minus the median AUC at 0%.
    pub delta_auc: f64,
}

/// Training size and noisy share of `extremes + noisy + pct%·noisy`.
pub fn oversample_composition(n_extremes: usize, n_noisy: usize, pct: u32) -> (usize, f64) {
    let extra = (f64::from(pct) / 100.0 * n_noisy as f64).round() as usize;
    let noisy = n_noisy + extra;
    let total = n_extremes + noisy;
    (total, noisy as f64 / total as f64)
}

/// Noisy rows that are not also extremes rows, ascending.
fn noisy_rows(dataset: &Dataset, noisy: &NoisyArea, extremes: &ExtremesSpec) -> Vec<usize> {
    let ext = extremes.all_indices();
    noisy
        .rows(dataset.target())
        .into_iter()
        .filter(|i| ext.binary_search(i).is_err())
        .collect()
}

fn both_classes(labels: &[Class], rows: &[usize], min_each: usize) -> bool {
    let c1 = rows.iter().filter(|&&i| labels[i].is_positive()).count();
    c1 >= min_each && rows.len() - c1 >= min_each
}

/// Out-of-sample split restricted to `pool`, redrawn when a side lacks a class.
fn split_pool(pool: &[usize], labels: &[Class], rng: &mut Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = pool.len();
    for _ in 0..=MAX_REDRAWS {
        let mut drawn = vec![false; n];
        let train: Vec<usize> = (0..n)
            .map(|_| {
                let k = rng.random_range(0..n);
                drawn[k] = true;
                pool[k]
            })
            .collect();
        let test: Vec<usize> = (0..n).filter(|&k| !drawn[k]).map(|k| pool[k]).collect();
        if both_classes(labels, &train, 2) && both_classes(labels, &test, 1) {
            return Ok((train, test));
        }
    }
    Err(Error::ResampleExhausted(MAX_REDRAWS))
}

fn check_inputs(extremes: &ExtremesSpec, noisy_rows: &[usize]) -> Result<()> {
    if extremes.is_empty() {
        return Err(Error::EmptyExtremes);
    }
    if noisy_rows.is_empty() {
        return Err(Error::EmptyNoisyArea);
    }
    Ok(())
}

/// For each oversampling level, train on a bootstrap of the extremes plus
/// every noisy row plus `pct%` extra noisy rows drawn with replacement, and
/// test on the extremes rows left out of the bootstrap. Iteration `i` uses
/// the same extremes resample at every level. Hyper-parameters are tuned
/// once on extremes ∪ noisy area.
#[allow(clippy::too_many_arguments)]
pub fn oversample_experiment(
    dataset: &Dataset,
    spec: &DiscretizationSpec,
    noisy: &NoisyArea,
    extremes: &ExtremesSpec,
    kind: ClassifierKind,
    cfg: &OversampleConfig,
    n_boot: usize,
    seed: u64,
    grid: &TuningGrid,
) -> Result<Vec<OversampleRow>> {
    let noisy_idx = noisy_rows(dataset, noisy, extremes);
    check_inputs(extremes, &noisy_idx)?;
    if n_boot == 0 {
        return Err(Error::invalid("n_boot must be positive"));
    }
    let labels = &spec.labels;
    let ext = extremes.all_indices();
    let mut base: Vec<usize> = ext.iter().chain(&noisy_idx).copied().collect();
    base.sort_unstable();
    let base_labels: Vec<Class> = base.iter().map(|&i| labels[i]).collect();
    let params = tune(kind, &dataset.features().select_rows(&base), &base_labels, grid, seed)?;

    let mut rows = Vec::with_capacity(cfg.over_sample_pcts.len());
    for (level, &pct) in cfg.over_sample_pcts.iter().enumerate() {
        let extra = (f64::from(pct) / 100.0 * noisy_idx.len() as f64).round() as usize;
        let aucs: Vec<f64> = (0..n_boot)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let mut rng = rng::substream(seed, stream::BOOTSTRAP, i as u64);
                let (mut train_rows, test_rows) = split_pool(&ext, labels, &mut rng)?;
                train_rows.extend(&noisy_idx);
                let mut over = rng::substream(rng::derive_seed(seed, stream::OVERSAMPLE, level as u64), stream::OVERSAMPLE, i as u64);
                train_rows.extend((0..extra).map(|_| noisy_idx[over.random_range(0..noisy_idx.len())]));
                fit_and_score(dataset, labels, kind, &params, &train_rows, &test_rows, rng::derive_seed(seed, stream::TRAIN, i as u64))
            })
            .collect::<Result<_>>()?;
        let (n_train, noisy_share) = oversample_composition(ext.len(), noisy_idx.len(), pct);
        rows.push(OversampleRow {
            over_sample_pct: pct,
            n_train,
            noisy_share,
            median_auc: median(&aucs),
            delta_auc: 0.0,
        });
    }
    if let Some(first) = rows.first().map(|r| r.median_auc) {
        for r in &mut rows {
            r.delta_auc = r.median_auc - first;
        }
    }
    Ok(rows)
}

fn fit_and_score(
    dataset: &Dataset,
    labels: &[Class],
    kind: ClassifierKind,
    params: &HyperParams,
    train_rows: &[usize],
    test_rows: &[usize],
    seed: u64,
) -> Result<f64> {
    let x = dataset.features();
    let ytr: Vec<Class> = train_rows.iter().map(|&i| labels[i]).collect();
    let model = train(kind, &x.select_rows(train_rows), &ytr, params, seed)?;
    let yte: Vec<Class> = test_rows.iter().map(|&i| labels[i]).collect();
    auc(&yte, &model.predict_proba(&x.select_rows(test_rows))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyToExtremes {
    pub n_noisy: usize,
    pub n_extremes: usize,
    pub median_auc: f64,
    pub aucs: Vec<f64>,
}

/// Random forest trained on bootstraps of the noisy-area rows and scored on
/// every extremes row.
#[allow(clippy::too_many_arguments)]
pub fn noisy_to_extremes_experiment(
    dataset: &Dataset,
    spec: &DiscretizationSpec,
    noisy: &NoisyArea,
    extremes: &ExtremesSpec,
    params: &HyperParams,
    n_boot: usize,
    seed: u64,
) -> Result<NoisyToExtremes> {
    let noisy_idx = noisy_rows(dataset, noisy, extremes);
    check_inputs(extremes, &noisy_idx)?;
    if n_boot == 0 {
        return Err(Error::invalid("n_boot must be positive"));
    }
    let labels = &spec.labels;
    let ext = extremes.all_indices();
    if !both_classes(labels, &ext, 1) {
        return Err(Error::SingleClassTruth);
    }
    let aucs: Vec<f64> = (0..n_boot)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = rng::substream(seed, stream::BOOTSTRAP, i as u64);
            for _ in 0..=MAX_REDRAWS {
                let train_rows: Vec<usize> =
                    (0..noisy_idx.len()).map(|_| noisy_idx[rng.random_range(0..noisy_idx.len())]).collect();
                if both_classes(labels, &train_rows, 2) {
                    return fit_and_score(
                        dataset,
                        labels,
                        ClassifierKind::RandomForest,
                        params,
                        &train_rows,
                        &ext,
                        rng::derive_seed(seed, stream::TRAIN, i as u64),
                    );
                }
            }
            Err(Error::ResampleExhausted(MAX_REDRAWS))
        })
        .collect::<Result<_>>()?;
    Ok(NoisyToExtremes {
        n_noisy: noisy_idx.len(),
        n_extremes: ext.len(),
        median_auc: median(&aucs),
        aucs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{discretize_with, extremes as find_extremes, noisy_area_at, ThresholdMethod};
    use crate::pipeline::synthetic::generate_synthetic;

    #[test]
    fn composition_of_the_reported_configuration() {
        let (total, share) = oversample_composition(1427, 2711, 0);
        assert_eq!(total, 4138);
        assert_eq!((share * 100.0).floor(), 65.0);
        let shares: Vec<f64> = [100, 200, 300]
            .iter()
            .map(|&p| (oversample_composition(1427, 2711, p).1 * 100.0).floor())
            .collect();
        assert_eq!(shares, vec![79.0, 85.0, 88.0]);
    }

    fn setup(n: usize, seed: u64) -> (Dataset, DiscretizationSpec, NoisyArea, ExtremesSpec) {
        let d = generate_synthetic(n, 3, 10.0, 1.0, seed).unwrap();
        let c = ThresholdMethod::Median.threshold(d.target()).unwrap();
        let spec = discretize_with(&d, c, Some(ThresholdMethod::Median)).unwrap();
        let area = noisy_area_at(d.target(), c, 10.0);
        let ext = find_extremes(d.target(), 0.1).unwrap();
        (d, spec, area, ext)
    }

    #[test]
    fn zero_percent_trains_on_extremes_and_noisy_area() {
        let (d, spec, area, ext) = setup(300, 1);
        let grid = TuningGrid {
            lr_ridge: vec![1e-4],
            ..TuningGrid::default()
        };
        let cfg = OversampleConfig {
            over_sample_pcts: vec![0, 100],
        };
        let rows = oversample_experiment(&d, &spec, &area, &ext, ClassifierKind::LogisticRegression, &cfg, 6, 2, &grid).unwrap();
        let n_noisy = noisy_rows(&d, &area, &ext).len();
        assert_eq!(rows[0].n_train, ext.all_indices().len() + n_noisy);
        assert_eq!(rows[0].delta_auc, 0.0);
        assert_eq!(rows[1].n_train, ext.all_indices().len() + 2 * n_noisy);
    }

    #[test]
    fn empty_inputs_are_errors() {
        let (d, spec, area, _) = setup(200, 2);
        let empty = ExtremesSpec {
            fraction: 0.1,
            low_indices: vec![],
            high_indices: vec![],
        };
        let params = HyperParams::RandomForest { n_trees: 5, mtry: 1 };
        assert!(matches!(
            noisy_to_extremes_experiment(&d, &spec, &area, &empty, &params, 3, 0),
            Err(Error::EmptyExtremes)
        ));
    }
}
