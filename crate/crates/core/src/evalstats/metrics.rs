//! Binary classification measures with class1 as the positive class.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discretize::Class;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Accuracy,
    Precision,
    Recall,
    Brier,
    Auc,
    FMeasure,
    Mcc,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::Accuracy,
        Measure::Precision,
        Measure::Recall,
        Measure::Brier,
        Measure::Auc,
        Measure::FMeasure,
        Measure::Mcc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Accuracy => "accuracy",
            Measure::Precision => "precision",
            Measure::Recall => "recall",
            Measure::Brier => "brier",
            Measure::Auc => "auc",
            Measure::FMeasure => "f_measure",
            Measure::Mcc => "mcc",
        }
    }

    /// Brier is a loss; every other measure improves upwards.
    pub fn higher_is_better(self) -> bool {
        self != Measure::Brier
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfVector {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub brier: f64,
    pub auc: f64,
    pub f_measure: f64,
    pub mcc: f64,
}

impl PerfVector {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::Accuracy => self.accuracy,
            Measure::Precision => self.precision,
            Measure::Recall => self.recall,
            Measure::Brier => self.brier,
            Measure::Auc => self.auc,
            Measure::FMeasure => self.f_measure,
            Measure::Mcc => self.mcc,
        }
    }
}

/// Zero-denominator conventions that were applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerfFlags {
    pub precision_undefined: bool,
    pub f_measure_undefined: bool,
    pub mcc_undefined: bool,
}

impl PerfFlags {
    pub fn any(&self) -> bool {
        self.precision_undefined || self.f_measure_undefined || self.mcc_undefined
    }

    pub fn merge(&mut self, other: PerfFlags) {
        self.precision_undefined |= other.precision_undefined;
        self.f_measure_undefined |= other.f_measure_undefined;
        self.mcc_undefined |= other.mcc_undefined;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Confusion {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn recall(&self) -> f64 {
        let d = self.tp + self.fn_;
        if d == 0 {
            0.0
        } else {
            self.tp as f64 / d as f64
        }
    }

    pub fn mcc(&self) -> Option<f64> {
        let (tp, fp, fn_, tn) = (self.tp as f64, self.fp as f64, self.fn_ as f64, self.tn as f64);
        let d = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        (d > 0.0).then(|| (tp * tn - fp * fn_) / d.sqrt())
    }

    /// Threshold measures; precision, F and MCC fall back to 0 when their
    /// denominator vanishes.
    pub fn measures(&self) -> (f64, f64, f64, f64, f64, PerfFlags) {
        let mut flags = PerfFlags::default();
        let precision = self.precision().unwrap_or_else(|| {
            flags.precision_undefined = true;
            0.0
        });
        let recall = self.recall();
        let f = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            flags.f_measure_undefined = true;
            0.0
        };
        let mcc = self.mcc().unwrap_or_else(|| {
            flags.mcc_undefined = true;
            0.0
        });
        (self.accuracy(), precision, recall, f, mcc, flags)
    }
}

/// ROC-AUC as the share of (class1, class2) pairs ranked concordantly, ties
/// counting one half.
pub fn auc_from_bools(truth: &[bool], scores: &[f64]) -> Result<f64> {
    if truth.len() != scores.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: scores.len(),
        });
    }
    let n_pos = truth.iter().filter(|&&t| t).count() as u64;
    let n_neg = truth.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClassTruth);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the concordance count stays an exact integer
    let mut twice: u64 = 0;
    let mut neg_below: u64 = 0;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end < order.len() && scores[order[end]] == scores[order[k]] {
            end += 1;
        }
        let pos = order[k..end].iter().filter(|&&i| truth[i]).count() as u64;
        let neg = (end - k) as u64 - pos;
        twice += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        k = end;
    }
    Ok(twice as f64 / (2 * n_pos * n_neg) as f64)
}

pub fn auc(truth: &[Class], scores: &[f64]) -> Result<f64> {
    let t: Vec<bool> = truth.iter().map(|c| c.is_positive()).collect();
    auc_from_bools(&t, scores)
}

pub fn brier(truth: &[bool], probs: &[f64]) -> f64 {
    let s: f64 = truth
        .iter()
        .zip(probs)
        .map(|(&t, &p)| {
            let y = if t { 1.0 } else { 0.0 };
            (p - y) * (p - y)
        })
        .sum();
    s / truth.len() as f64
}

pub fn perf_measures_flagged(truth: &[Class], probs: &[f64], cutoff: f64) -> Result<(PerfVector, PerfFlags)> {
    if truth.len() != probs.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: probs.len(),
        });
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid("probabilities must lie in [0, 1]"));
    }
    let t: Vec<bool> = truth.iter().map(|c| c.is_positive()).collect();
    let auc = auc_from_bools(&t, probs)?;
    let predicted: Vec<bool> = probs.iter().map(|&p| p >= cutoff).collect();
    let (accuracy, precision, recall, f_measure, mcc, flags) = Confusion::from_predictions(&t, &predicted).measures();
    Ok((
        PerfVector {
            accuracy,
            precision,
            recall,
            brier: brier(&t, probs),
            auc,
            f_measure,
            mcc,
        },
        flags,
    ))
}

pub fn perf_measures(truth: &[Class], probs: &[f64], cutoff: f64) -> Result<PerfVector> {
    perf_measures_flagged(truth, probs, cutoff).map(|(p, _)| p)
}
