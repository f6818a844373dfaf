//! Removal of correlated and redundant features before modelling.
//!
//! Correlated features are clustered by complete linkage on Spearman |ρ| and
//! one representative per cluster is kept. Redundant features are then
//! dropped one at a time while some feature is explained by the others with
//! OLS R² at or above the threshold. Both filters alternate until neither
//! drops anything, so applying [`reduce`] twice equals applying it once.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::evalstats::stattest::average_ranks;
use crate::matrix::Matrix;

pub const DEFAULT_RHO: f64 = 0.7;
pub const DEFAULT_R2: f64 = 0.9;
pub const RIDGE_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub retained: Vec<String>,
    /// Dropped feature → the representative kept for its cluster.
    pub dropped_correlated: BTreeMap<String, String>,
    pub dropped_redundant: Vec<(String, f64)>,
    /// Zero-variance features; their correlations are taken as 0.
    pub constant_features: Vec<String>,
    /// Set when a singular design needed the ridge jitter.
    pub ridge_jitter_used: bool,
}

impl ReductionReport {
    fn identity(names: &[String]) -> Self {
        ReductionReport {
            retained: names.to_vec(),
            dropped_correlated: BTreeMap::new(),
            dropped_redundant: Vec::new(),
            constant_features: Vec::new(),
            ridge_jitter_used: false,
        }
    }
}

fn is_constant(col: &[f64]) -> bool {
    col.iter().all(|v| *v == col[0])
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Pearson correlation of average-ranked columns. Pairs involving a constant
/// column are 0; the diagonal is 1.
pub fn spearman_matrix(dataset: &Dataset) -> Result<Matrix> {
    spearman_of(dataset.features())
}

pub fn spearman_of(x: &Matrix) -> Result<Matrix> {
    if x.rows() < 2 {
        return Err(Error::invalid("Spearman correlation needs at least two rows"));
    }
    let p = x.cols();
    let ranked: Vec<Vec<f64>> = (0..p).map(|j| average_ranks(&x.column(j)).0).collect();
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        m.set(i, i, 1.0);
        for j in 0..i {
            let r = pearson(&ranked[i], &ranked[j]);
            m.set(i, j, r);
            m.set(j, i, r);
        }
    }
    Ok(m)
}

/// Complete-linkage clusters whose members pairwise satisfy |ρ| ≥ `rho`.
/// Clusters are listed by their smallest member, members ascending.
pub fn correlation_clusters(rho_matrix: &Matrix, rho: f64) -> Vec<Vec<usize>> {
    let p = rho_matrix.rows();
    let mut clusters: Vec<Vec<usize>> = (0..p).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let link = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| rho_matrix.get(i, j).abs())
                    .fold(f64::INFINITY, f64::min);
                if link >= rho && best.is_none_or(|(_, _, l)| link > l) {
                    best = Some((a, b, link));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        clusters.sort_by_key(|c| c[0]);
    }
    clusters
}

/// Member with the lowest mean |ρ| to features outside the cluster; ties go
/// to the earliest column.
fn representative(rho_matrix: &Matrix, cluster: &[usize]) -> usize {
    let p = rho_matrix.rows();
    let outside: Vec<usize> = (0..p).filter(|j| !cluster.contains(j)).collect();
    let mut best = (cluster[0], f64::INFINITY);
    for &i in cluster {
        let score = if outside.is_empty() {
            0.0
        } else {
            outside.iter().map(|&j| rho_matrix.get(i, j).abs()).sum::<f64>() / outside.len() as f64
        };
        if score < best.1 {
            best = (i, score);
        }
    }
    best.0
}

fn check_threshold(name: &str, t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1], got {t}")))
    }
}

pub fn correlation_filter(dataset: &Dataset, rho_threshold: f64) -> Result<ReductionReport> {
    check_threshold("rho threshold", rho_threshold)?;
    let names = dataset.feature_names();
    let mut report = ReductionReport::identity(names);
    report.constant_features = (0..names.len())
        .filter(|&j| is_constant(&dataset.features().column(j)))
        .map(|j| names[j].clone())
        .collect();
    if names.len() == 1 {
        return Ok(report);
    }
    let m = spearman_matrix(dataset)?;
    let clusters = correlation_clusters(&m, rho_threshold);
    let mut keep = vec![false; names.len()];
    for c in &clusters {
        let rep = representative(&m, c);
        keep[rep] = true;
        for &i in c {
            if i != rep {
                report.dropped_correlated.insert(names[i].clone(), names[rep].clone());
            }
        }
    }
    report.retained = (0..names.len()).filter(|&i| keep[i]).map(|i| names[i].clone()).collect();
    Ok(report)
}

/// OLS R² of column `target` regressed on `predictors` with an intercept.
/// The flag reports whether the ridge jitter was needed.
pub fn ols_r_squared(x: &Matrix, target: usize, predictors: &[usize]) -> (f64, bool) {
    let n = x.rows();
    let y = x.column(target);
    let my = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sst == 0.0 || predictors.is_empty() {
        return (0.0, false);
    }
    // centred design so the intercept drops out
    let k = predictors.len();
    let means: Vec<f64> = predictors.iter().map(|&j| x.column(j).iter().sum::<f64>() / n as f64).collect();
    let design = DMatrix::from_fn(n, k, |i, c| x.get(i, predictors[c]) - means[c]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - my));
    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &yc;
    let (beta, jitter) = match xtx.clone().cholesky() {
        Some(ch) => (ch.solve(&xty), false),
        None => {
            let reg = xtx + DMatrix::identity(k, k) * (RIDGE_JITTER * n as f64);
            match reg.cholesky() {
                Some(ch) => (ch.solve(&xty), true),
                None => return (0.0, true),
            }
        }
    };
    let resid = &yc - &design * beta;
    let sse = resid.norm_squared();
    ((1.0 - sse / sst).clamp(0.0, 1.0), jitter)
}

pub fn redundancy_filter(dataset: &Dataset, r2_threshold: f64) -> Result<ReductionReport> {
    check_threshold("r2 threshold", r2_threshold)?;
    let names = dataset.feature_names();
    let x = dataset.features();
    let mut report = ReductionReport::identity(names);
    let usable: Vec<bool> = (0..names.len()).map(|j| !is_constant(&x.column(j))).collect();
    let mut alive: Vec<usize> = (0..names.len()).collect();
    while alive.len() > 1 {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &j) in alive.iter().enumerate() {
            let preds: Vec<usize> = alive.iter().copied().filter(|&k| k != j && usable[k]).collect();
            let (r2, jitter) = ols_r_squared(x, j, &preds);
            report.ridge_jitter_used |= jitter;
            if r2 >= r2_threshold && best.is_none_or(|(_, b)| r2 > b) {
                best = Some((pos, r2));
            }
        }
        let Some((pos, r2)) = best else { break };
        let j = alive.remove(pos);
        report.dropped_redundant.push((names[j].clone(), r2));
    }
    report.retained = alive.iter().map(|&j| names[j].clone()).collect();
    Ok(report)
}

/// Alternate both filters until neither drops a feature.
pub fn reduce(dataset: &Dataset, rho_threshold: f64, r2_threshold: f64) -> Result<(Dataset, ReductionReport)> {
    check_threshold("rho threshold", rho_threshold)?;
    check_threshold("r2 threshold", r2_threshold)?;
    let mut current = dataset.clone();
    let mut total = ReductionReport::identity(dataset.feature_names());
    total.constant_features = (0..dataset.n_features())
        .filter(|&j| is_constant(&dataset.features().column(j)))
        .map(|j| dataset.feature_names()[j].clone())
        .collect();
    loop {
        let corr = correlation_filter(&current, rho_threshold)?;
        current = current.select_features_by_name(&corr.retained)?;
        let red = redundancy_filter(&current, r2_threshold)?;
        current = current.select_features_by_name(&red.retained)?;
        total.ridge_jitter_used |= red.ridge_jitter_used;
        let changed = !corr.dropped_correlated.is_empty() || !red.dropped_redundant.is_empty();
        total.dropped_correlated.extend(corr.dropped_correlated);
        total.dropped_redundant.extend(red.dropped_redundant);
        if !changed {
            break;
        }
    }
    total.retained = current.feature_names().to_vec();
    Ok((current, total))
}
