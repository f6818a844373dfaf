//! Wilcoxon signed-rank, Wilcoxon rank-sum (Mann–Whitney) and Cohen's d.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest effective n for the exact signed-rank distribution.
pub const WILCOXON_EXACT_MAX: usize = 12;
/// Rank-sum is exact when there are no ties and both samples are below this.
pub const MANN_WHITNEY_EXACT_BELOW: usize = 50;
/// Magnitude used for `d` when the pooled sd is zero but the means differ.
pub const D_CAP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EffectLabel {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectLabel {
    pub fn from_d(d: f64) -> EffectLabel {
        let a = d.abs();
        if a <= 0.2 {
            EffectLabel::Negligible
        } else if a <= 0.5 {
            EffectLabel::Small
        } else if a <= 0.8 {
            EffectLabel::Medium
        } else {
            EffectLabel::Large
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub p_value: f64,
    /// Signed-rank statistic W⁺.
    pub statistic: f64,
    pub cohens_d: f64,
    pub effect_label: EffectLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub p_value: f64,
    /// Sum of the ranks of the positive differences.
    pub statistic: f64,
    /// Number of non-zero differences.
    pub n_effective: usize,
    pub exact: bool,
}

fn standard_normal_sf(z: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    n.sf(z)
}

/// Average ranks (1-based) of `values` and the tie group sizes.
pub fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let mut end = k + 1;
        while end < order.len() && values[order[end]] == values[order[k]] {
            end += 1;
        }
        let r = (k + 1 + end) as f64 / 2.0;
        for &i in &order[k..end] {
            ranks[i] = r;
        }
        if end - k > 1 {
            ties.push(end - k);
        }
        k = end;
    }
    (ranks, ties)
}

fn tie_term(ties: &[usize]) -> f64 {
    ties.iter().map(|&t| (t * t * t - t) as f64).sum()
}

/// Paired two-sided signed-rank test on `a − b`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("signed-rank test needs at least one pair"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            p_value: 1.0,
            statistic: 0.0,
            n_effective: 0,
            exact: true,
        });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = average_ranks(&abs);
    let w: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();

    if n <= WILCOXON_EXACT_MAX {
        // doubled average ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        let mut counts = vec![0u64; total + 1];
        counts[0] = 1;
        for &r in &doubled {
            for s in (r..=total).rev() {
                counts[s] += counts[s - r];
            }
        }
        let w2 = (2.0 * w).round() as usize;
        let le: u64 = counts[..=w2].iter().sum();
        let ge: u64 = counts[w2..].iter().sum();
        let denom = (1u64 << n) as f64;
        let p = (2.0 * le.min(ge) as f64 / denom).min(1.0);
        return Ok(WilcoxonResult {
            p_value: p,
            statistic: w,
            n_effective: n,
            exact: true,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&ties) / 48.0;
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
        (2.0 * standard_normal_sf(z)).min(1.0)
    };
    Ok(WilcoxonResult {
        p_value: p,
        statistic: w,
        n_effective: n,
        exact: false,
    })
}

/// Counts of the rank sum of an `m`-subset of ranks `1..=m+n`, indexed by
/// `U = sum − m(m+1)/2`.
fn rank_sum_counts(m: usize, n: usize) -> Vec<f64> {
    let total = m + n;
    let k = m.min(n);
    let max_sum = (total - k + 1..=total).sum::<usize>();
    // dp[j][s]: subsets of size j with rank sum s
    let mut dp = vec![vec![0.0f64; max_sum + 1]; k + 1];
    dp[0][0] = 1.0;
    for r in 1..=total {
        for j in (1..=k.min(r)).rev() {
            let (lo, hi) = dp.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for s in (r..=max_sum).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let base = k * (k + 1) / 2;
    dp[k][base..=base + m * n].to_vec()
}

/// Two-sided Wilcoxon rank-sum p-value.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("rank-sum test needs two non-empty samples"));
    }
    let (m, n) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = average_ranks(&pooled);
    let r1: f64 = ranks[..m].iter().sum();
    let u = r1 - (m * (m + 1)) as f64 / 2.0;

    if ties.is_empty() && m < MANN_WHITNEY_EXACT_BELOW && n < MANN_WHITNEY_EXACT_BELOW {
        // the U distribution is symmetric in the roles of the two samples
        let counts = rank_sum_counts(m, n);
        let total: f64 = counts.iter().sum();
        let ui = u.round() as usize;
        let le: f64 = counts[..=ui].iter().sum();
        let ge: f64 = counts[ui..].iter().sum();
        return Ok((2.0 * le.min(ge) / total).min(1.0));
    }

    let (mf, nf) = (m as f64, n as f64);
    let big_n = mf + nf;
    let mean = mf * nf / 2.0;
    let var = mf * nf / 12.0 * ((big_n + 1.0) - tie_term(&ties) / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    Ok((2.0 * standard_normal_sf(z)).min(1.0))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sum_sq_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum()
}

fn ratio_or_cap(num: f64, sd: f64) -> (f64, bool) {
    if sd > 0.0 {
        (num / sd, false)
    } else if num == 0.0 {
        (0.0, false)
    } else {
        (D_CAP.copysign(num), true)
    }
}

/// Two-sample d with pooled sd; the flag marks a capped zero-sd case.
pub fn cohens_d_flagged(a: &[f64], b: &[f64]) -> Result<(f64, bool)> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("Cohen's d needs at least two points per sample"));
    }
    let pooled = ((sum_sq_dev(a) + sum_sq_dev(b)) / (a.len() + b.len() - 2) as f64).sqrt();
    Ok(ratio_or_cap(mean(a) - mean(b), pooled))
}

pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    cohens_d_flagged(a, b).map(|r| r.0)
}

/// `mean / sd` of a difference vector, sd with n − 1.
pub fn cohens_d_one_sample_flagged(diffs: &[f64]) -> Result<(f64, bool)> {
    if diffs.len() < 2 {
        return Err(Error::invalid("Cohen's d needs at least two points"));
    }
    let sd = (sum_sq_dev(diffs) / (diffs.len() - 1) as f64).sqrt();
    Ok(ratio_or_cap(mean(diffs), sd))
}

pub fn cohens_d_one_sample(diffs: &[f64]) -> Result<f64> {
    cohens_d_one_sample_flagged(diffs).map(|r| r.0)
}

/// Paired comparison: signed-rank p and W⁺ with the two-sample d.
pub fn paired_comparison(a: &[f64], b: &[f64]) -> Result<StatTestResult> {
    let w = wilcoxon_signed_rank(a, b)?;
    let d = cohens_d(a, b)?;
    Ok(StatTestResult {
        p_value: w.p_value,
        statistic: w.statistic,
        cohens_d: d,
        effect_label: EffectLabel::from_d(d),
    })
}
