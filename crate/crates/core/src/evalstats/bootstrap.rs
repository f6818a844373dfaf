//! Out-of-sample bootstrap: train on N rows drawn with replacement, test on
//! the rows never drawn.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{perf_measures_flagged, PerfFlags, PerfVector};
use super::scott_knott::scott_knott_esd;
use crate::discretize::Class;
use crate::error::{Error, Result};
use crate::learners::{train, ClassifierKind, HyperParams};
use crate::matrix::Matrix;
use crate::rng::{self, stream, Rng};

pub const DEFAULT_BOOTSTRAPS: usize = 100;
pub const MAX_REDRAWS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub perf: Vec<PerfVector>,
    /// `importance[i][f]`: importance of feature `f` in iteration `i`.
    pub importance: Vec<Vec<f64>>,
    /// Scott-Knott ESD rank per feature over the per-iteration importances.
    pub feature_ranks: Vec<usize>,
    pub test_sizes: Vec<usize>,
    /// Resamples rejected for lacking a class.
    pub redraws: usize,
    pub flags: PerfFlags,
}

impl BootstrapResult {
    pub fn n_boot(&self) -> usize {
        self.perf.len()
    }

    /// Per-iteration competition ranks of the importances.
    pub fn iteration_ranks(&self) -> Vec<Vec<usize>> {
        self.importance.iter().map(|imp| iteration_ranks(imp)).collect()
    }

    pub fn measure(&self, m: super::Measure) -> Vec<f64> {
        self.perf.iter().map(|p| p.get(m)).collect()
    }
}

/// Competition ranking, 1 = largest value; equal values share the best rank.
pub fn iteration_ranks(importance: &[f64]) -> Vec<usize> {
    importance
        .iter()
        .map(|v| 1 + importance.iter().filter(|u| *u > v).count())
        .collect()
}

fn resample_valid(labels: &[Class], train: &[usize], test: &[usize]) -> bool {
    let c1_train = train.iter().filter(|&&i| labels[i].is_positive()).count();
    let c1_test = test.iter().filter(|&&i| labels[i].is_positive()).count();
    c1_train >= 2 && train.len() - c1_train >= 2 && c1_test >= 1 && test.len() > c1_test
}

/// Training rows (with repeats) and out-of-sample test rows.
pub type Split = (Vec<usize>, Vec<usize>);

/// Draw `(train, test)` rows, redrawing at most `max_redraws` times when
/// either side lacks a class. Returns the split and the number of redraws.
pub fn draw_out_of_sample(
    labels: &[Class],
    rng: &mut Rng,
    max_redraws: usize,
) -> Result<(Split, usize)> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::invalid("bootstrap needs at least two rows"));
    }
    for attempt in 0..=max_redraws {
        let mut drawn = vec![false; n];
        let train: Vec<usize> = (0..n)
            .map(|_| {
                let i = rng.random_range(0..n);
                drawn[i] = true;
                i
            })
            .collect();
        let test: Vec<usize> = (0..n).filter(|&i| !drawn[i]).collect();
        if resample_valid(labels, &train, &test) {
            return Ok(((train, test), attempt));
        }
    }
    Err(Error::ResampleExhausted(max_redraws))
}

/// Run `n_boot` iterations with fixed hyper-parameters. Iteration `i`
/// resamples from substream `(seed, BOOTSTRAP, i)` and trains with seed
/// `(seed, TRAIN, i)`, so results do not depend on thread scheduling and
/// iteration `i` is comparable across datasets sharing the seed.
pub fn bootstrap_validate(
    kind: ClassifierKind,
    features: &Matrix,
    labels: &[Class],
    params: &HyperParams,
    n_boot: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if n_boot == 0 {
        return Err(Error::invalid("n_boot must be positive"));
    }
    if features.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: features.rows(),
            actual: labels.len(),
        });
    }
    type Iter = (PerfVector, PerfFlags, Vec<f64>, usize, usize);
    let iterations: Vec<Iter> = (0..n_boot)
        .into_par_iter()
        .map(|i| -> Result<Iter> {
            let mut rng = rng::substream(seed, stream::BOOTSTRAP, i as u64);
            let ((tr, te), redraws) = draw_out_of_sample(labels, &mut rng, MAX_REDRAWS)?;
            let ytr: Vec<Class> = tr.iter().map(|&r| labels[r]).collect();
            let yte: Vec<Class> = te.iter().map(|&r| labels[r]).collect();
            let model = train(
                kind,
                &features.select_rows(&tr),
                &ytr,
                params,
                rng::derive_seed(seed, stream::TRAIN, i as u64),
            )?;
            let probs = model.predict_proba(&features.select_rows(&te))?;
            let (perf, flags) = perf_measures_flagged(&yte, &probs, 0.5)?;
            Ok((perf, flags, model.feature_importance(), te.len(), redraws))
        })
        .collect::<Result<_>>()?;

    let mut flags = PerfFlags::default();
    let mut redraws = 0;
    let mut perf = Vec::with_capacity(n_boot);
    let mut importance = Vec::with_capacity(n_boot);
    let mut test_sizes = Vec::with_capacity(n_boot);
    for (p, f, imp, size, r) in iterations {
        flags.merge(f);
        redraws += r;
        perf.push(p);
        importance.push(imp);
        test_sizes.push(size);
    }
    let p = features.cols();
    let groups: Vec<Vec<f64>> = (0..p)
        .map(|f| {
            let mut g: Vec<f64> = importance.iter().map(|imp| imp[f]).collect();
            if g.len() == 1 {
                g.push(g[0]);
            }
            g
        })
        .collect();
    let feature_ranks = scott_knott_esd(&groups)?;
    Ok(BootstrapResult {
        perf,
        importance,
        feature_ranks,
        test_sizes,
        redraws,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::HyperParams;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn planted(n: usize, seed: u64) -> (Matrix, Vec<Class>) {
        let mut rng = Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * 3);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            labels.push(if row[0] <= 0.0 { Class::Class1 } else { Class::Class2 });
            data.extend(row);
        }
        (Matrix::from_vec(n, 3, data).unwrap(), labels)
    }

    #[test]
    fn competition_ranks() {
        assert_eq!(iteration_ranks(&[0.5, 2.0, 0.5, 1.0]), vec![3, 1, 3, 2]);
    }

    #[test]
    fn out_of_bag_fraction_near_e_inverse() {
        let labels: Vec<Class> = (0..500).map(|i| if i % 2 == 0 { Class::Class1 } else { Class::Class2 }).collect();
        let mut total = 0;
        for i in 0..100 {
            let mut rng = rng::substream(3, stream::BOOTSTRAP, i);
            let ((tr, te), _) = draw_out_of_sample(&labels, &mut rng, MAX_REDRAWS).unwrap();
            assert_eq!(tr.len(), 500);
            assert!(te.iter().all(|t| !tr.contains(t)));
            total += te.len();
        }
        let frac = total as f64 / (100.0 * 500.0);
        assert!((0.33..=0.41).contains(&frac), "{frac}");
    }

    #[test]
    fn exhausted_resamples() {
        let labels = [Class::Class1, Class::Class1, Class::Class2];
        let mut rng = Rng::seed_from_u64(0);
        assert!(matches!(
            draw_out_of_sample(&labels, &mut rng, 3),
            Err(Error::ResampleExhausted(3))
        ));
    }

    #[test]
    fn deterministic_and_accurate_on_planted_signal() {
        let (x, l) = planted(300, 1);
        let params = HyperParams::RandomForest { n_trees: 50, mtry: 1 };
        let a = bootstrap_validate(ClassifierKind::RandomForest, &x, &l, &params, 20, 9).unwrap();
        let b = bootstrap_validate(ClassifierKind::RandomForest, &x, &l, &params, 20, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_boot(), 20);
        let mut aucs = a.measure(super::super::Measure::Auc);
        aucs.sort_by(f64::total_cmp);
        assert!(aucs[10] >= 0.95, "{aucs:?}");
        assert_eq!(a.feature_ranks[0], 1);
        assert!(a.feature_ranks[1] > 1 && a.feature_ranks[2] > 1);
    }
}
