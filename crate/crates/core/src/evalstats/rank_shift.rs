//! Likelihood that a top-ranked feature shifts rank under resampling.

use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scott_knott::scott_knott_esd;
use crate::error::{Error, Result};
use crate::rng::{self, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankShift {
    /// Nominal rank → share of repetitions where that feature ranked otherwise.
    pub likelihood: BTreeMap<usize, f64>,
    /// Nominal rank → feature index.
    pub nominal_feature: BTreeMap<usize, usize>,
    pub n_rep: usize,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Features ordered by (median pooled rank, mean pooled rank, index).
pub fn nominal_order(pooled: &[Vec<f64>]) -> Vec<usize> {
    let key: Vec<(f64, f64)> = pooled
        .iter()
        .map(|r| (median(r), r.iter().sum::<f64>() / r.len() as f64))
        .collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| {
        key[a]
            .0
            .total_cmp(&key[b].0)
            .then(key[a].1.total_cmp(&key[b].1))
            .then(a.cmp(&b))
    });
    order
}

/// Concatenate per-iteration rank lists (each `[feature] → rank`) into one
/// observation list per feature.
pub fn pool_rank_lists<'a>(lists: impl IntoIterator<Item = &'a Vec<usize>>) -> Result<Vec<Vec<f64>>> {
    let mut pooled: Vec<Vec<f64>> = Vec::new();
    for (k, list) in lists.into_iter().enumerate() {
        if k == 0 {
            pooled = vec![Vec::new(); list.len()];
        } else if list.len() != pooled.len() {
            return Err(Error::LengthMismatch {
                expected: pooled.len(),
                actual: list.len(),
            });
        }
        for (f, &r) in list.iter().enumerate() {
            pooled[f].push(r as f64);
        }
    }
    if pooled.is_empty() {
        return Err(Error::invalid("rank-shift needs at least one rank list"));
    }
    Ok(pooled)
}

/// `pooled[f]` holds every observed rank of feature `f` (1 = most
/// important). Each repetition resamples every feature's ranks with
/// replacement and re-ranks features with Scott-Knott ESD; repetition `r`
/// uses substream `(seed, RANK_SHIFT, r)`.
pub fn rank_shift_likelihood(pooled: &[Vec<f64>], n_rep: usize, top_k: usize, seed: u64) -> Result<RankShift> {
    if pooled.is_empty() || pooled.iter().any(|r| r.is_empty()) {
        return Err(Error::invalid("rank-shift needs at least one rank per feature"));
    }
    if n_rep == 0 {
        return Err(Error::invalid("rank-shift needs at least one repetition"));
    }
    let order = nominal_order(pooled);
    let shown = top_k.min(pooled.len());
    let reps: Vec<Vec<usize>> = (0..n_rep)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::substream(seed, stream::RANK_SHIFT, r as u64);
            let groups: Vec<Vec<f64>> = pooled
                .iter()
                .map(|ranks| {
                    // negated so that higher means more important; a single
                    // observation is duplicated to satisfy the group minimum
                    let size = ranks.len().max(2);
                    (0..size).map(|_| -ranks[rng.random_range(0..ranks.len())]).collect()
                })
                .collect();
            scott_knott_esd(&groups)
        })
        .collect::<Result<_>>()?;

    let mut likelihood = BTreeMap::new();
    let mut nominal_feature = BTreeMap::new();
    for x in 1..=shown {
        let f = order[x - 1];
        let shifted = reps.iter().filter(|r| r[f] != x).count();
        likelihood.insert(x, shifted as f64 / n_rep as f64);
        nominal_feature.insert(x, f);
    }
    Ok(RankShift {
        likelihood,
        nominal_feature,
        n_rep,
    })
}
