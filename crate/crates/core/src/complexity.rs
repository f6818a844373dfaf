//! Ho–Basu data complexity measures: F1, L2, N2 and N4.
//!
//! Distance-based measures work on features z-scored with the statistics of
//! the subset being measured.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::QuantaAssignment;
use crate::discretize::{class_counts, Class};
use crate::error::{Error, Result};
use crate::learners::logistic;
use crate::matrix::{sq_dist, standardize, Matrix};
use crate::rng::{self, stream, Rng};

/// Cap used when F1 would be infinite (zero within-class variance).
pub const F1_CAP: f64 = 1e12;
/// Ridge penalty of the linear classifier behind L2.
pub const L2_RIDGE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub f1: f64,
    pub l2: f64,
    pub n2: f64,
    pub n4: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ComplexityReport {
    pub const MEASURES: [&'static str; 4] = ["F1", "L2", "N2", "N4"];

    pub fn values(&self) -> [f64; 4] {
        [self.f1, self.l2, self.n2, self.n4]
    }
}

fn require_two_per_class(labels: &[Class]) -> Result<()> {
    let (c1, c2) = class_counts(labels);
    for (class, count) in [(Class::Class1, c1), (Class::Class2, c2)] {
        if count < 2 {
            return Err(Error::InsufficientClass {
                class,
                count,
                required: 2,
            });
        }
    }
    Ok(())
}

fn check_shape(features: &Matrix, labels: &[Class]) -> Result<()> {
    if features.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: features.rows(),
            actual: labels.len(),
        });
    }
    require_two_per_class(labels)
}

fn mean_var(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Maximum Fisher discriminant ratio over features. The boolean is set when
/// some feature hit the cap.
pub fn fisher_f1_flagged(features: &Matrix, labels: &[Class]) -> Result<(f64, bool)> {
    check_shape(features, labels)?;
    let mut best = 0.0f64;
    let mut capped = false;
    for j in 0..features.cols() {
        let col = |c: Class| {
            (0..features.rows())
                .filter(move |&i| labels[i] == c)
                .map(move |i| features.get(i, j))
        };
        let (m1, v1) = mean_var(col(Class::Class1));
        let (m2, v2) = mean_var(col(Class::Class2));
        let num = (m1 - m2).powi(2);
        let den = v1 + v2;
        let ratio = if den > 0.0 {
            (num / den).min(F1_CAP)
        } else if num == 0.0 {
            0.0
        } else {
            capped = true;
            F1_CAP
        };
        best = best.max(ratio);
    }
    Ok((best, capped))
}

pub fn fisher_f1(features: &Matrix, labels: &[Class]) -> Result<f64> {
    fisher_f1_flagged(features, labels).map(|(f, _)| f)
}

/// Training error of ridge logistic regression on standardized features.
pub fn linear_sep_l2(features: &Matrix, labels: &[Class], _seed: u64) -> Result<f64> {
    check_shape(features, labels)?;
    let z = standardize(features);
    let y: Vec<f64> = labels.iter().map(|c| if c.is_positive() { 1.0 } else { 0.0 }).collect();
    let fit = logistic::fit_irls(&z, &y, L2_RIDGE);
    let wrong = (0..z.rows())
        .filter(|&i| {
            let p = logistic::sigmoid(fit.linear_predictor(z.row(i)));
            (p >= 0.5) != labels[i].is_positive()
        })
        .count();
    Ok(wrong as f64 / z.rows() as f64)
}

/// Nearest-neighbour distance of row `i` to rows of class `class`, skipping `i`.
fn nearest_of_class(z: &Matrix, labels: &[Class], i: usize, class: Class) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..z.rows() {
        if k != i && labels[k] == class {
            best = best.min(sq_dist(z.row(i), z.row(k)));
        }
    }
    best.sqrt()
}

/// Ratio of summed intra-class to summed inter-class nearest-neighbour
/// distances.
pub fn mixture_n2(features: &Matrix, labels: &[Class]) -> Result<f64> {
    check_shape(features, labels)?;
    let z = standardize(features);
    let pairs: Vec<(f64, f64)> = (0..z.rows())
        .into_par_iter()
        .map(|i| {
            (
                nearest_of_class(&z, labels, i, labels[i]),
                nearest_of_class(&z, labels, i, labels[i].other()),
            )
        })
        .collect();
    // sequential sum keeps the result independent of thread scheduling
    let (intra, inter) = pairs.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok(if inter > 0.0 {
        intra / inter
    } else if intra > 0.0 {
        f64::INFINITY
    } else {
        0.0
    })
}

/// Index of the nearest row to `point`; ties go to the lowest index.
pub(crate) fn nearest_row(z: &Matrix, point: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for k in 0..z.rows() {
        let d = sq_dist(point, z.row(k));
        if d < best.0 {
            best = (d, k);
        }
    }
    best.1
}

/// Synthetic points interpolated between same-class pairs, with their class.
///
/// One point per real row: the class is drawn proportionally to class size,
/// two distinct members uniformly, and a single α ~ U(0, 1) places the point
/// on the segment between them.
pub fn interpolate_same_class(z: &Matrix, labels: &[Class], rng: &mut Rng) -> Vec<(Vec<f64>, Class)> {
    let members = |c: Class| -> Vec<usize> { (0..labels.len()).filter(|&i| labels[i] == c).collect() };
    let c1 = members(Class::Class1);
    let c2 = members(Class::Class2);
    let n = labels.len();
    (0..n)
        .map(|_| {
            let (class, pool) = if rng.random_range(0..n) < c1.len() {
                (Class::Class1, &c1)
            } else {
                (Class::Class2, &c2)
            };
            let a = rng.random_range(0..pool.len());
            let mut b = rng.random_range(0..pool.len() - 1);
            if b >= a {
                b += 1;
            }
            let alpha: f64 = rng.random();
            let (ra, rb) = (z.row(pool[a]), z.row(pool[b]));
            let point = ra.iter().zip(rb).map(|(x, y)| x + alpha * (y - x)).collect();
            (point, class)
        })
        .collect()
}

/// 1-NN error rate on interpolated same-class points.
pub fn nonlinearity_n4(features: &Matrix, labels: &[Class], rng: &mut Rng) -> Result<f64> {
    check_shape(features, labels)?;
    let z = standardize(features);
    let synthetic = interpolate_same_class(&z, labels, rng);
    let errors = synthetic
        .par_iter()
        .filter(|(p, c)| labels[nearest_row(&z, p)] != *c)
        .count();
    Ok(errors as f64 / synthetic.len() as f64)
}

pub fn nonlinearity_n4_seeded(features: &Matrix, labels: &[Class], seed: u64) -> Result<f64> {
    let mut rng = rng::substream(seed, stream::QUANTA, 0);
    nonlinearity_n4(features, labels, &mut rng)
}

/// All four measures on one subset.
pub fn complexity_report(features: &Matrix, labels: &[Class], seed: u64) -> Result<ComplexityReport> {
    let (f1, capped) = fisher_f1_flagged(features, labels)?;
    let mut flags = Vec::new();
    if capped {
        flags.push("f1_capped".to_string());
    }
    Ok(ComplexityReport {
        f1,
        l2: linear_sep_l2(features, labels, seed)?,
        n2: mixture_n2(features, labels)?,
        n4: nonlinearity_n4_seeded(features, labels, seed)?,
        flags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumComplexity {
    pub bin: usize,
    pub n_class1: usize,
    pub n_class2: usize,
    pub report: ComplexityReport,
}

/// One report per quantum, pooling both classes' points in that bin.
///
/// A bin that lacks two points of either class reports zeros and is flagged.
pub fn quanta_profile(
    features: &Matrix,
    labels: &[Class],
    quanta: &QuantaAssignment,
    seed: u64,
) -> Result<Vec<QuantumComplexity>> {
    if quanta.bin_index.len() != labels.len() || features.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            actual: quanta.bin_index.len(),
        });
    }
    (1..=quanta.n_bins)
        .into_par_iter()
        .map(|bin| {
            let rows = quanta.rows_in_bin(bin);
            let sub_labels: Vec<Class> = rows.iter().map(|&i| labels[i]).collect();
            let (n_class1, n_class2) = class_counts(&sub_labels);
            let report = if n_class1 == 0 || n_class2 == 0 {
                zero_report("single_class")
            } else if n_class1 < 2 || n_class2 < 2 {
                zero_report("insufficient_class")
            } else {
                let sub = features.select_rows(&rows);
                complexity_report(&sub, &sub_labels, rng::derive_seed(seed, stream::QUANTA, bin as u64))?
            };
            Ok(QuantumComplexity {
                bin,
                n_class1,
                n_class2,
                report,
            })
        })
        .collect()
}

fn zero_report(flag: &str) -> ComplexityReport {
    ComplexityReport {
        f1: 0.0,
        l2: 0.0,
        n2: 0.0,
        n4: 0.0,
        flags: vec![flag.to_string()],
    }
}
