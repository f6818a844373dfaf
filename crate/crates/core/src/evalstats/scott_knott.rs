//! Scott-Knott ranking with effect-size merging.
//!
//! Groups are ordered by mean, descending, and split top-down at the cut that
//! maximizes the between-group sum of squares. A cut stands only when the two
//! sides differ by rank-sum test (p ≤ 0.05) and by a non-negligible
//! Cohen's d (|d| > 0.2).

use std::collections::BTreeMap;

use super::stattest::{cohens_d, mann_whitney};
use crate::error::{Error, Result};

pub const ALPHA: f64 = 0.05;
pub const NEGLIGIBLE_D: f64 = 0.2;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Order of groups by mean descending; equal means keep input order.
pub fn mean_order(groups: &[Vec<f64>]) -> Vec<usize> {
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    order
}

/// Whether the pooled values of two sides count as distinct.
pub fn sides_differ(left: &[f64], right: &[f64]) -> Result<bool> {
    let p = mann_whitney(left, right)?;
    let d = cohens_d(left, right)?;
    Ok(p <= ALPHA && d.abs() > NEGLIGIBLE_D)
}

fn pooled(groups: &[Vec<f64>], order: &[usize]) -> Vec<f64> {
    order.iter().flat_map(|&g| groups[g].iter().copied()).collect()
}

/// Cut index `k` (left = `order[..k]`) maximizing between-group SS; the
/// first maximum wins.
fn best_cut(groups: &[Vec<f64>], order: &[usize]) -> usize {
    let sums: Vec<f64> = order.iter().map(|&g| groups[g].iter().sum()).collect();
    let counts: Vec<f64> = order.iter().map(|&g| groups[g].len() as f64).collect();
    let total_s: f64 = sums.iter().sum();
    let total_n: f64 = counts.iter().sum();
    let grand = total_s / total_n;
    let (mut ls, mut ln) = (0.0, 0.0);
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..order.len() {
        ls += sums[k - 1];
        ln += counts[k - 1];
        let (rs, rn) = (total_s - ls, total_n - ln);
        let bss = ln * (ls / ln - grand).powi(2) + rn * (rs / rn - grand).powi(2);
        if bss > best.1 {
            best = (k, bss);
        }
    }
    best.0
}

fn partition(groups: &[Vec<f64>], order: &[usize], out: &mut Vec<Vec<usize>>) -> Result<()> {
    if order.len() > 1 {
        let k = best_cut(groups, order);
        let (l, r) = order.split_at(k);
        if sides_differ(&pooled(groups, l), &pooled(groups, r))? {
            partition(groups, l, out)?;
            partition(groups, r, out)?;
            return Ok(());
        }
    }
    out.push(order.to_vec());
    Ok(())
}

/// Rank per group (1 = highest-mean partition), contiguous.
pub fn scott_knott_esd(groups: &[Vec<f64>]) -> Result<Vec<usize>> {
    if groups.is_empty() {
        return Err(Error::invalid("Scott-Knott needs at least one group"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("every Scott-Knott group needs at least two values"));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Scott-Knott values must be finite"));
    }
    let order = mean_order(groups);
    let mut parts = Vec::new();
    partition(groups, &order, &mut parts)?;
    let mut ranks = vec![0; groups.len()];
    for (r, part) in parts.iter().enumerate() {
        for &g in part {
            ranks[g] = r + 1;
        }
    }
    Ok(ranks)
}

pub fn scott_knott_esd_named(groups: &[(String, Vec<f64>)]) -> Result<BTreeMap<String, usize>> {
    let values: Vec<Vec<f64>> = groups.iter().map(|(_, v)| v.clone()).collect();
    let ranks = scott_knott_esd(&values)?;
    Ok(groups.iter().map(|(n, _)| n.clone()).zip(ranks).collect())
}
