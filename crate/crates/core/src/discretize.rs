//! Cutpoints, class labels, the noisy area and the extremes.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::nonlinearity_n4;
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, stream};

/// Binary class derived from the continuous target. `Class1` (at or below the
/// cutpoint) is the positive class everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Class1,
    Class2,
}

impl Class {
    #[inline]
    pub fn from_cutpoint(target: f64, cutpoint: f64) -> Class {
        if target <= cutpoint {
            Class::Class1
        } else {
            Class::Class2
        }
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self == Class::Class1
    }

    pub fn other(self) -> Class {
        match self {
            Class::Class1 => Class::Class2,
            Class::Class2 => Class::Class1,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Class1 => "class1",
            Class::Class2 => "class2",
        })
    }
}

pub type ClassLabels = Vec<Class>;

pub fn class_counts(labels: &[Class]) -> (usize, usize) {
    let c1 = labels.iter().filter(|c| c.is_positive()).count();
    (c1, labels.len() - c1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMethod {
    Median,
    Ckmeans,
    #[serde(rename = "cart")]
    CartStump,
}

impl ThresholdMethod {
    pub const ALL: [ThresholdMethod; 3] =
        [ThresholdMethod::Median, ThresholdMethod::Ckmeans, ThresholdMethod::CartStump];

    pub fn short_name(self) -> &'static str {
        match self {
            ThresholdMethod::Median => "MT",
            ThresholdMethod::Ckmeans => "CT",
            ThresholdMethod::CartStump => "RTT",
        }
    }

    pub fn threshold(self, target: &[f64]) -> Result<f64> {
        match self {
            ThresholdMethod::Median => threshold_median(target),
            ThresholdMethod::Ckmeans => threshold_ckmeans(target),
            ThresholdMethod::CartStump => threshold_cart(target),
        }
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMethod::Median => "median",
            ThresholdMethod::Ckmeans => "ckmeans",
            ThresholdMethod::CartStump => "cart",
        })
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn threshold_median(target: &[f64]) -> Result<f64> {
    if target.len() < 2 {
        return Err(Error::invalid("median threshold needs at least two values"));
    }
    let s = sorted(target);
    let n = s.len();
    Ok(if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    })
}

/// Distinct sorted values with multiplicities.
fn distinct_weighted(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let s = sorted(values);
    let mut xs: Vec<f64> = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    for v in s {
        match xs.last() {
            Some(&last) if last == v => *ws.last_mut().unwrap() += 1.0,
            _ => {
                xs.push(v);
                ws.push(1.0);
            }
        }
    }
    (xs, ws)
}

/// Optimal 1D k-means by dynamic programming over sorted distinct values.
///
/// Returns the exclusive end (in distinct-value index space) of each cluster
/// and the distinct values themselves. Equal values never straddle clusters.
pub fn ckmeans_breaks(values: &[f64], k: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    let (xs, ws) = distinct_weighted(values);
    let m = xs.len();
    if k == 0 || m < k {
        return Err(Error::DegenerateTarget);
    }
    // weighted prefix sums, centred for numerical stability
    let centre = xs[m / 2];
    let mut sw = vec![0.0; m + 1];
    let mut sx = vec![0.0; m + 1];
    let mut sxx = vec![0.0; m + 1];
    for i in 0..m {
        let d = xs[i] - centre;
        sw[i + 1] = sw[i] + ws[i];
        sx[i + 1] = sx[i] + ws[i] * d;
        sxx[i + 1] = sxx[i] + ws[i] * d * d;
    }
    // within-cluster SS of distinct values [a, b)
    let ssq = |a: usize, b: usize| -> f64 {
        let w = sw[b] - sw[a];
        let s = sx[b] - sx[a];
        (sxx[b] - sxx[a] - s * s / w).max(0.0)
    };

    // cost[c][i]: best SS of first i distinct values in c+1 clusters
    let mut cost = vec![vec![f64::INFINITY; m + 1]; k];
    let mut back = vec![vec![0usize; m + 1]; k];
    for i in 1..=m {
        cost[0][i] = ssq(0, i);
    }
    for c in 1..k {
        for i in (c + 1)..=m {
            let mut best = f64::INFINITY;
            let mut arg = c;
            for j in c..i {
                let v = cost[c - 1][j] + ssq(j, i);
                if v < best {
                    best = v;
                    arg = j;
                }
            }
            cost[c][i] = best;
            back[c][i] = arg;
        }
    }
    let mut ends = vec![m; k];
    let mut i = m;
    for c in (1..k).rev() {
        let j = back[c][i];
        ends[c - 1] = j;
        i = j;
    }
    Ok((xs, ends))
}

/// Largest value of the lower cluster of the optimal 1D 2-means split.
pub fn threshold_ckmeans(target: &[f64]) -> Result<f64> {
    if target.len() < 2 {
        return Err(Error::DegenerateTarget);
    }
    let (xs, ends) = ckmeans_breaks(target, 2)?;
    Ok(xs[ends[0] - 1])
}

/// Regression-stump bucket constraints for [`threshold_cart`].
pub const CART_MINBUCKET: usize = 7;
pub const CART_MINSPLIT: usize = 20;

/// Root split of a regression tree fitted on the target alone.
///
/// Candidates are midpoints between consecutive distinct values; both sides
/// need `CART_MINBUCKET` points. Below `CART_MINSPLIT` rows the bucket size
/// relaxes to 1.
pub fn threshold_cart(target: &[f64]) -> Result<f64> {
    let minbucket = if target.len() < CART_MINSPLIT { 1 } else { CART_MINBUCKET };
    threshold_cart_with(target, minbucket)
}

pub fn threshold_cart_with(target: &[f64], minbucket: usize) -> Result<f64> {
    let (xs, ws) = distinct_weighted(target);
    if xs.len() < 2 {
        return Err(Error::DegenerateTarget);
    }
    let n: f64 = ws.iter().sum();
    let centre = xs[xs.len() / 2];
    let total_s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - centre)).sum();
    let mut left_w = 0.0;
    let mut left_s = 0.0;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..xs.len() - 1 {
        left_w += ws[i];
        left_s += ws[i] * (xs[i] - centre);
        let right_w = n - left_w;
        if left_w < minbucket as f64 || right_w < minbucket as f64 {
            continue;
        }
        // SSE = Σx² − S_l²/n_l − S_r²/n_r; Σx² is constant so maximize the rest
        let right_s = total_s - left_s;
        let gain = left_s * left_s / left_w + right_s * right_s / right_w;
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, (xs[i] + xs[i + 1]) / 2.0));
        }
    }
    best.map(|(_, t)| t).ok_or(Error::DegenerateTarget)
}

/// Cutpoint plus the labels it induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    /// `None` when the cutpoint was supplied directly (expert override).
    pub method: Option<ThresholdMethod>,
    pub cutpoint: f64,
    pub labels: ClassLabels,
}

impl DiscretizationSpec {
    pub fn counts(&self) -> (usize, usize) {
        class_counts(&self.labels)
    }
}

pub fn label_target(target: &[f64], cutpoint: f64) -> ClassLabels {
    target.iter().map(|&t| Class::from_cutpoint(t, cutpoint)).collect()
}

pub fn discretize(dataset: &Dataset, cutpoint: f64) -> Result<DiscretizationSpec> {
    discretize_with(dataset, cutpoint, None)
}

pub fn discretize_with(
    dataset: &Dataset,
    cutpoint: f64,
    method: Option<ThresholdMethod>,
) -> Result<DiscretizationSpec> {
    if !cutpoint.is_finite() {
        return Err(Error::invalid("cutpoint must be finite"));
    }
    let labels = label_target(dataset.target(), cutpoint);
    let (c1, c2) = class_counts(&labels);
    if c1 == 0 {
        return Err(Error::EmptyClass(Class::Class1));
    }
    if c2 == 0 {
        return Err(Error::EmptyClass(Class::Class2));
    }
    Ok(DiscretizationSpec {
        method,
        cutpoint,
        labels,
    })
}

// ---------------------------------------------------------------------------
// Noisy area

/// One evaluated window of the noisy-area search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub x_pct: f64,
    pub n_points: usize,
    /// `None` when a class has fewer than two points in the window.
    pub n4: Option<f64>,
}

/// The demarcated noisy area `(lower, upper)` around the cutpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyArea {
    pub limit_pct: f64,
    pub lower: f64,
    pub upper: f64,
    pub noisy_fraction: f64,
    pub n_noisy: usize,
}

impl NoisyArea {
    pub fn contains(&self, t: f64) -> bool {
        self.lower < t && t < self.upper
    }

    pub fn rows(&self, target: &[f64]) -> Vec<usize> {
        (0..target.len()).filter(|&i| self.contains(target[i])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyAreaSpec {
    pub cutpoint: f64,
    pub step_size_pct: f64,
    pub profile: Vec<WindowScore>,
    /// `None` means no noisy area could be found.
    pub area: Option<NoisyArea>,
    pub flags: Vec<String>,
}

impl NoisyAreaSpec {
    pub fn limit_pct(&self) -> Option<f64> {
        self.area.as_ref().map(|a| a.limit_pct)
    }
}

/// The increments `step, 2·step, …` not exceeding 100.
pub fn window_grid(step_size_pct: f64) -> Vec<f64> {
    let mut xs = Vec::new();
    let mut k = 1u32;
    loop {
        let x = f64::from(k) * step_size_pct;
        if x > 100.0 + 1e-9 {
            break;
        }
        xs.push(x.min(100.0));
        k += 1;
    }
    xs
}

/// Half-open bounds of the open window `cutpoint ± |cutpoint|·x/100`.
pub fn window_bounds(cutpoint: f64, x_pct: f64) -> (f64, f64) {
    let half = cutpoint.abs() * x_pct / 100.0;
    (cutpoint - half, cutpoint + half)
}

/// Search for the window around the cutpoint with the highest N4.
pub fn estimate_noisy_area(
    dataset: &Dataset,
    cutpoint: f64,
    step_size_pct: f64,
    seed: u64,
) -> Result<NoisyAreaSpec> {
    if !(step_size_pct > 0.0 && step_size_pct <= 100.0) {
        return Err(Error::invalid("step size must lie in (0, 100]"));
    }
    if !cutpoint.is_finite() {
        return Err(Error::invalid("cutpoint must be finite"));
    }
    let mut spec = NoisyAreaSpec {
        cutpoint,
        step_size_pct,
        profile: Vec::new(),
        area: None,
        flags: Vec::new(),
    };
    if cutpoint <= 0.0 {
        spec.flags.push("non-positive cutpoint: candidate band is empty".into());
        return Ok(spec);
    }
    let target = dataset.target();
    let labels = label_target(target, cutpoint);
    let grid = window_grid(step_size_pct);
    spec.profile = grid
        .par_iter()
        .enumerate()
        .map(|(k, &x)| {
            let (lo, hi) = window_bounds(cutpoint, x);
            let rows: Vec<usize> = (0..target.len()).filter(|&i| lo < target[i] && target[i] < hi).collect();
            let sub_labels: Vec<Class> = rows.iter().map(|&i| labels[i]).collect();
            let (c1, c2) = class_counts(&sub_labels);
            let n4 = if c1 >= 2 && c2 >= 2 {
                let feats: Matrix = dataset.features().select_rows(&rows);
                let mut rng = rng::substream(seed, stream::NOISY_WINDOW, k as u64);
                Some(nonlinearity_n4(&feats, &sub_labels, &mut rng)?)
            } else {
                None
            };
            Ok(WindowScore {
                x_pct: x,
                n_points: rows.len(),
                n4,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = spec
        .profile
        .iter()
        .filter_map(|w| w.n4.map(|v| (w.x_pct, v)))
        .fold(None, |acc: Option<(f64, f64)>, (x, v)| match acc {
            Some((_, bv)) if v <= bv => acc,
            _ => Some((x, v)),
        });
    match best {
        Some((limit, _)) => spec.area = Some(noisy_area_at(target, cutpoint, limit)),
        None => spec.flags.push("no window holds two points of each class".into()),
    }
    Ok(spec)
}

/// Noisy area for an explicit limit (expert-supplied or estimated).
pub fn noisy_area_at(target: &[f64], cutpoint: f64, limit_pct: f64) -> NoisyArea {
    let (lower, upper) = window_bounds(cutpoint, limit_pct);
    let lower = lower.max(cutpoint - cutpoint.abs());
    let n_noisy = target.iter().filter(|&&t| lower < t && t < upper).count();
    NoisyArea {
        limit_pct,
        lower,
        upper,
        noisy_fraction: n_noisy as f64 / target.len() as f64,
        n_noisy,
    }
}

// ---------------------------------------------------------------------------
// Extremes and windows

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremesSpec {
    pub fraction: f64,
    pub low_indices: Vec<usize>,
    pub high_indices: Vec<usize>,
}

impl ExtremesSpec {
    pub fn all_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.low_indices.iter().chain(&self.high_indices).copied().collect();
        v.sort_unstable();
        v
    }

    pub fn is_empty(&self) -> bool {
        self.low_indices.is_empty() && self.high_indices.is_empty()
    }
}

/// Bottom and top `⌊fraction·N⌋` rows of the sorted target.
pub fn extremes(target: &[f64], fraction: f64) -> Result<ExtremesSpec> {
    if !(fraction > 0.0 && fraction < 0.5) {
        return Err(Error::invalid("extremes fraction must lie in (0, 0.5)"));
    }
    let n = target.len();
    let m = (fraction * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| target[a].total_cmp(&target[b]).then(a.cmp(&b)));
    let mut low_indices = order[..m].to_vec();
    let mut high_indices = order[n - m..].to_vec();
    low_indices.sort_unstable();
    high_indices.sort_unstable();
    Ok(ExtremesSpec {
        fraction,
        low_indices,
        high_indices,
    })
}

/// Rows kept after discarding the open window `cutpoint ± |cutpoint|·x/100`.
pub fn retained_rows(target: &[f64], cutpoint: f64, x_pct: f64) -> Vec<usize> {
    let (lo, hi) = window_bounds(cutpoint, x_pct);
    (0..target.len()).filter(|&i| !(lo < target[i] && target[i] < hi)).collect()
}

pub fn remove_window(
    dataset: &Dataset,
    labels: &[Class],
    cutpoint: f64,
    x_pct: f64,
) -> Result<(Dataset, ClassLabels)> {
    if x_pct < 0.0 || !x_pct.is_finite() {
        return Err(Error::invalid("window width must be non-negative"));
    }
    let rows = retained_rows(dataset.target(), cutpoint, x_pct);
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let kept_labels = rows.iter().map(|&i| labels[i]).collect();
    Ok((dataset.subset(&rows), kept_labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn within_ss(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum()
    }

    /// Exhaustive contiguous 2-split over sorted values, splitting only
    /// between distinct values. Returns the lower-cluster maximum.
    fn brute_force_two_means(values: &[f64]) -> f64 {
        let s = sorted(values);
        let mut best = (f64::INFINITY, f64::NAN);
        for cut in 1..s.len() {
            if s[cut - 1] == s[cut] {
                continue;
            }
            let cost = within_ss(&s[..cut]) + within_ss(&s[cut..]);
            if cost < best.0 {
                best = (cost, s[cut - 1]);
            }
        }
        best.1
    }

    fn brute_force_cart(values: &[f64], minbucket: usize) -> f64 {
        let s = sorted(values);
        let mut best = (f64::INFINITY, f64::NAN);
        for cut in 1..s.len() {
            if s[cut - 1] == s[cut] || cut < minbucket || s.len() - cut < minbucket {
                continue;
            }
            let cost = within_ss(&s[..cut]) + within_ss(&s[cut..]);
            if cost < best.0 - 1e-9 * (1.0 + cost.abs()) {
                best = (cost, (s[cut - 1] + s[cut]) / 2.0);
            }
        }
        best.1
    }

    fn toy(target: Vec<f64>) -> Dataset {
        let n = target.len();
        let feats = Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        Dataset::new(vec!["f".into()], feats, target, "toy").unwrap()
    }

    #[test]
    fn median_examples() {
        assert_eq!(threshold_median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(threshold_median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert!(threshold_median(&[1.0]).is_err());
    }

    #[test]
    fn ckmeans_examples() {
        assert_eq!(threshold_ckmeans(&[1.0, 2.0, 3.0, 10.0, 11.0, 12.0]).unwrap(), 3.0);
        assert_eq!(threshold_ckmeans(&[0.0, 0.0, 0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(threshold_ckmeans(&[2.0, 2.0, 2.0]), Err(Error::DegenerateTarget)));
    }

    #[test]
    fn ckmeans_three_clusters() {
        let (xs, ends) = ckmeans_breaks(&[1.0, 1.1, 5.0, 5.2, 9.0, 9.1], 3).unwrap();
        assert_eq!(ends, vec![2, 4, 6]);
        assert_eq!(xs.len(), 6);
    }

    #[test]
    fn cart_examples() {
        assert_eq!(threshold_cart(&[1.0, 2.0, 3.0, 10.0, 11.0, 12.0]).unwrap(), 6.5);
        let mut v = vec![0.0; 15];
        v.extend(vec![1.0; 15]);
        assert_eq!(threshold_cart(&v).unwrap(), 0.5);
        assert!(matches!(threshold_cart(&[5.0; 30]), Err(Error::DegenerateTarget)));
    }

    #[test]
    fn cart_constraints_can_exclude_every_split() {
        // 25 rows but only 3 distinct values, one side always below 7
        let mut v = vec![0.0; 20];
        v.extend(vec![1.0; 3]);
        v.extend(vec![2.0; 2]);
        assert!(matches!(threshold_cart(&v), Err(Error::DegenerateTarget)));
    }

    #[test]
    fn discretize_rule() {
        let d = toy(vec![1.0, 2.0, 3.0]);
        let spec = discretize(&d, 2.0).unwrap();
        assert_eq!(spec.labels, vec![Class::Class1, Class::Class1, Class::Class2]);
        assert!(matches!(discretize(&d, 0.5), Err(Error::EmptyClass(Class::Class1))));
        assert!(matches!(discretize(&d, 3.0), Err(Error::EmptyClass(Class::Class2))));
        assert!(discretize(&d, f64::NAN).is_err());
    }

    #[test]
    fn window_grid_is_arithmetic() {
        assert_eq!(window_grid(5.0).len(), 20);
        assert_eq!(window_grid(5.0)[1], 10.0);
        assert_eq!(window_grid(100.0), vec![100.0]);
        assert_eq!(*window_grid(0.5).last().unwrap(), 100.0);
        assert_eq!(window_grid(30.0), vec![30.0, 60.0, 90.0]);
    }

    #[test]
    fn non_positive_cutpoint_has_no_noisy_area() {
        let d = toy((0..20).map(|i| i as f64 - 10.0).collect());
        let spec = estimate_noisy_area(&d, 0.0, 5.0, 1).unwrap();
        assert!(spec.area.is_none());
        assert!(!spec.flags.is_empty());
    }

    #[test]
    fn empty_band_has_no_noisy_area() {
        // nothing falls inside (0, 2)
        let d = toy(vec![-5.0, -4.0, -3.0, 10.0, 11.0, 12.0]);
        let spec = estimate_noisy_area(&d, 1.0, 5.0, 1).unwrap();
        assert!(spec.area.is_none());
        assert!(spec.profile.iter().all(|w| w.n4.is_none()));
    }

    #[test]
    fn single_window_picks_hundred() {
        let d = toy((1..=40).map(f64::from).collect());
        let spec = estimate_noisy_area(&d, 20.0, 100.0, 3).unwrap();
        assert_eq!(spec.limit_pct(), Some(100.0));
        assert!(estimate_noisy_area(&d, 20.0, 0.0, 3).is_err());
    }

    #[test]
    fn noisy_area_bounds() {
        let target: Vec<f64> = (1..=100).map(f64::from).collect();
        let area = noisy_area_at(&target, 50.0, 10.0);
        assert_eq!((area.lower, area.upper), (45.0, 55.0));
        // 46..=54
        assert_eq!(area.n_noisy, 9);
        assert!((area.noisy_fraction - 0.09).abs() < 1e-15);
    }

    #[test]
    fn extremes_counts() {
        let t: Vec<f64> = (0..10).map(f64::from).collect();
        let e = extremes(&t, 0.10).unwrap();
        assert_eq!(e.low_indices, vec![0]);
        assert_eq!(e.high_indices, vec![9]);

        let t: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64).collect();
        let e = extremes(&t, 0.5 - 1e-9).unwrap();
        assert_eq!(e.low_indices.len(), 49);
        assert_eq!(e.high_indices.len(), 49);
        assert!(e.low_indices.iter().all(|i| !e.high_indices.contains(i)));
        assert!(extremes(&t, 0.5).is_err());
        assert!(extremes(&t, 0.0).is_err());
    }

    #[test]
    fn extremes_disjoint_under_ties() {
        let e = extremes(&[3.0; 9], 0.45).unwrap();
        assert_eq!(e.low_indices, vec![0, 1, 2, 3]);
        assert_eq!(e.high_indices, vec![5, 6, 7, 8]);
    }

    #[test]
    fn remove_window_open_interval() {
        let d = toy(vec![1.0, 2.0, 3.0, 4.0]);
        let labels = label_target(d.target(), 2.0);
        let (same, l0) = remove_window(&d, &labels, 2.0, 0.0).unwrap();
        assert_eq!(same, d);
        assert_eq!(l0, labels);
        let (kept, kl) = remove_window(&d, &labels, 2.0, 50.0).unwrap();
        assert_eq!(kept.target(), &[1.0, 3.0, 4.0]);
        assert_eq!(kl, vec![Class::Class1, Class::Class2, Class::Class2]);
        assert!(remove_window(&d, &labels, 2.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn ckmeans_matches_brute_force(v in prop::collection::vec(-100f64..100.0, 2..20)) {
            let distinct = sorted(&v).windows(2).any(|w| w[0] != w[1]);
            prop_assume!(distinct);
            prop_assert_eq!(threshold_ckmeans(&v).unwrap(), brute_force_two_means(&v));
        }

        #[test]
        fn cart_matches_constrained_brute_force(v in prop::collection::vec(0f64..50.0, 20..50)) {
            let expect = brute_force_cart(&v, CART_MINBUCKET);
            prop_assume!(expect.is_finite());
            prop_assert_eq!(threshold_cart(&v).unwrap(), expect);
        }

        #[test]
        fn thresholds_permutation_invariant(v in prop::collection::vec(-10f64..10.0, 2..40), rot in 0usize..40) {
            let mut w = v.clone();
            let r = rot % w.len();
            w.rotate_left(r);
            w.reverse();
            prop_assert_eq!(threshold_median(&v).unwrap(), threshold_median(&w).unwrap());
            if let Ok(t) = threshold_ckmeans(&v) {
                prop_assert_eq!(t, threshold_ckmeans(&w).unwrap());
            }
            if let Ok(t) = threshold_cart(&v) {
                prop_assert_eq!(t, threshold_cart(&w).unwrap());
            }
        }

        #[test]
        fn shift_equivariance(v in prop::collection::vec(-10f64..10.0, 3..30), c in 0.5f64..100.0) {
            // dyadic values keep the shifted arithmetic exact
            let v: Vec<f64> = v.iter().map(|x| (x * 8.0).round() / 8.0).collect();
            let c = c.round();
            let w: Vec<f64> = v.iter().map(|x| x + c).collect();
            prop_assert_eq!(threshold_median(&w).unwrap(), threshold_median(&v).unwrap() + c);
            if let Ok(t) = threshold_ckmeans(&v) {
                prop_assert_eq!(threshold_ckmeans(&w).unwrap(), t + c);
            }
        }

        #[test]
        fn windows_are_nested(t in prop::collection::vec(0f64..100.0, 1..60), x1 in 0f64..100.0, dx in 0f64..100.0) {
            let small = retained_rows(&t, 50.0, x1);
            let large = retained_rows(&t, 50.0, x1 + dx);
            prop_assert!(large.iter().all(|i| small.contains(i)));
        }

        #[test]
        fn extremes_match_sort(t in prop::collection::vec(-1e3f64..1e3, 10..80), f in 0.01f64..0.49) {
            let e = extremes(&t, f).unwrap();
            let m = (f * t.len() as f64).floor() as usize;
            let s = sorted(&t);
            let mut low: Vec<f64> = e.low_indices.iter().map(|&i| t[i]).collect();
            let mut high: Vec<f64> = e.high_indices.iter().map(|&i| t[i]).collect();
            low.sort_by(f64::total_cmp);
            high.sort_by(f64::total_cmp);
            prop_assert_eq!(&low[..], &s[..m]);
            prop_assert_eq!(&high[..], &s[s.len() - m..]);
        }
    }
}
