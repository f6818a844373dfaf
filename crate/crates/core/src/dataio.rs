//! Tabular input, the Box-Cox transform and per-class quanta binning.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discretize::Class;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Feature matrix plus the continuous dependent variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    features: Matrix,
    target: Vec<f64>,
    source_path: String,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        features: Matrix,
        target: Vec<f64>,
        source_path: impl Into<String>,
    ) -> Result<Self> {
        if target.is_empty() || features.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.cols() == 0 {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::LengthMismatch {
                expected: features.cols(),
                actual: feature_names.len(),
            });
        }
        if target.len() != features.rows() {
            return Err(Error::LengthMismatch {
                expected: features.rows(),
                actual: target.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateFeature(name.clone()));
            }
        }
        if features.as_slice().iter().chain(&target).any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains NaN or infinite values"));
        }
        Ok(Dataset {
            feature_names,
            features,
            target,
            source_path: source_path.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    /// Rows in the given order. Callers must not pass an empty index set.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(rows),
            target: rows.iter().map(|&i| self.target[i]).collect(),
            source_path: self.source_path.clone(),
        }
    }

    pub fn select_features(&self, cols: &[usize]) -> Dataset {
        Dataset {
            feature_names: cols.iter().map(|&j| self.feature_names[j].clone()).collect(),
            features: self.features.select_columns(cols),
            target: self.target.clone(),
            source_path: self.source_path.clone(),
        }
    }

    pub fn select_features_by_name(&self, names: &[String]) -> Result<Dataset> {
        let cols = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::invalid(format!("unknown feature `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select_features(&cols))
    }
}

/// Load a headed CSV; every column except `target_column` becomes a feature.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, target_column, &path.display().to_string())
}

pub fn read_csv(reader: impl std::io::Read, target_column: &str, source: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingTargetColumn(target_column.to_string()))?;
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&j| j != target_idx).collect();

    let mut values = Vec::new();
    let mut target = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |j: usize| -> Result<f64> {
            let cell = record.get(j).unwrap_or("").trim();
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::NonNumericCell {
                    row: r + 1,
                    column: headers[j].clone(),
                    value: cell.to_string(),
                }),
            }
        };
        for &j in &feature_idx {
            values.push(parse(j)?);
        }
        target.push(parse(target_idx)?);
    }
    if target.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let features = Matrix::from_vec(target.len(), feature_idx.len(), values)?;
    let names = feature_idx.iter().map(|&j| headers[j].clone()).collect();
    Dataset::new(names, features, target, source)
}

/// Write features followed by the target column named `target_column`.
pub fn write_csv(dataset: &Dataset, target_column: &str, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = dataset.feature_names.iter().map(String::as_str).collect();
    header.push(target_column);
    w.write_record(&header)?;
    for i in 0..dataset.n_rows() {
        let mut rec: Vec<String> = dataset.features.row(i).iter().map(f64::to_string).collect();
        rec.push(dataset.target[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_csv(dataset: &Dataset, target_column: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(dataset, target_column, std::io::BufWriter::new(file))
}

// ---------------------------------------------------------------------------
// Box-Cox

const LAMBDA_MIN: f64 = -2.0;
const LAMBDA_STEPS: usize = 400;
const LAMBDA_STEP: f64 = 0.01;

/// Box-Cox transform with a fixed exponent. Inputs must be positive.
pub fn box_cox_with_lambda(values: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_positive(values)?;
    Ok(values.iter().map(|&v| box_cox_value(v, lambda)).collect())
}

#[inline]
fn box_cox_value(v: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        v.ln()
    } else {
        (v.powf(lambda) - 1.0) / lambda
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("box-cox needs at least one value"));
    }
    if let Some(v) = values.iter().find(|v| v.is_nan() || **v <= 0.0 || v.is_infinite()) {
        return Err(Error::invalid(format!("box-cox input must be positive, found {v}")));
    }
    Ok(())
}

/// Profile log-likelihood of the Box-Cox exponent (normal model, variance
/// profiled out).
pub fn box_cox_log_likelihood(values: &[f64], lambda: f64) -> f64 {
    let n = values.len() as f64;
    let t: Vec<f64> = values.iter().map(|&v| box_cox_value(v, lambda)).collect();
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let log_sum: f64 = values.iter().map(|v| v.ln()).sum();
    if var <= 0.0 {
        return f64::INFINITY;
    }
    -0.5 * n * var.ln() + (lambda - 1.0) * log_sum
}

/// Maximize the profile log-likelihood over λ ∈ [−2, 2] in steps of 0.01.
/// Ties resolve to the smallest λ.
pub fn fit_box_cox_lambda(values: &[f64]) -> Result<f64> {
    check_positive(values)?;
    let mut best = (f64::NEG_INFINITY, 1.0);
    for k in 0..=LAMBDA_STEPS {
        let lambda = ((LAMBDA_MIN + k as f64 * LAMBDA_STEP) * 100.0).round() / 100.0;
        let ll = box_cox_log_likelihood(values, lambda);
        if ll == f64::INFINITY {
            // constant input: every λ is equally degenerate
            return Ok(1.0);
        }
        if ll > best.0 {
            best = (ll, lambda);
        }
    }
    Ok(best.1)
}

/// Fit λ and transform. Returns `(transformed, lambda)`.
pub fn box_cox(values: &[f64]) -> Result<(Vec<f64>, f64)> {
    let lambda = fit_box_cox_lambda(values)?;
    Ok((box_cox_with_lambda(values, lambda)?, lambda))
}

/// Shift so the minimum becomes 1 when any value is non-positive.
/// Returns the shifted values and the shift applied (0 when untouched).
pub fn shift_positive(values: &[f64]) -> (Vec<f64>, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        (values.to_vec(), 0.0)
    } else {
        let shift = 1.0 - min;
        (values.iter().map(|v| v + shift).collect(), shift)
    }
}

// ---------------------------------------------------------------------------
// Quanta

/// Per-class equal-width bins over the Box-Cox-transformed target.
/// Bin 1 is farthest from the cutpoint, bin `n_bins` adjacent to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantaAssignment {
    pub bin_index: Vec<usize>,
    pub n_bins: usize,
    pub lambda_class1: f64,
    pub lambda_class2: f64,
    pub shift_class1: f64,
    pub shift_class2: f64,
}

impl QuantaAssignment {
    pub fn rows_in_bin(&self, bin: usize) -> Vec<usize> {
        (0..self.bin_index.len()).filter(|&i| self.bin_index[i] == bin).collect()
    }
}

pub fn bin_into_quanta(dataset: &Dataset, labels: &[Class], n_bins: usize) -> Result<QuantaAssignment> {
    bin_target_into_quanta(dataset.target(), labels, n_bins, None)
}

/// Quanta binning on a raw target. `fixed_lambda` skips the λ search.
pub fn bin_target_into_quanta(
    target: &[f64],
    labels: &[Class],
    n_bins: usize,
    fixed_lambda: Option<f64>,
) -> Result<QuantaAssignment> {
    if n_bins < 2 {
        return Err(Error::invalid("n_bins must be at least 2"));
    }
    if labels.len() != target.len() {
        return Err(Error::LengthMismatch {
            expected: target.len(),
            actual: labels.len(),
        });
    }
    let mut bin_index = vec![0usize; target.len()];
    let mut lambdas = [1.0; 2];
    let mut shifts = [0.0; 2];
    for (slot, class) in [Class::Class1, Class::Class2].into_iter().enumerate() {
        let rows: Vec<usize> = (0..target.len()).filter(|&i| labels[i] == class).collect();
        if rows.is_empty() {
            return Err(Error::EmptyClass(class));
        }
        let raw: Vec<f64> = rows.iter().map(|&i| target[i]).collect();
        let (shifted, shift) = shift_positive(&raw);
        let lambda = match fixed_lambda {
            Some(l) => l,
            None => fit_box_cox_lambda(&shifted)?,
        };
        let t = box_cox_with_lambda(&shifted, lambda)?;
        lambdas[slot] = lambda;
        shifts[slot] = shift;

        let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / n_bins as f64;
        for (k, &i) in rows.iter().enumerate() {
            // position counted upward from the class minimum, 1..=n_bins
            let upward = if width > 0.0 {
                (((t[k] - lo) / width).floor() as usize).min(n_bins - 1) + 1
            } else {
                0
            };
            bin_index[i] = match (upward, class) {
                (0, _) => n_bins,
                (b, Class::Class1) => b,
                (b, Class::Class2) => n_bins + 1 - b,
            };
        }
    }
    Ok(QuantaAssignment {
        bin_index,
        n_bins,
        lambda_class1: lambdas[0],
        lambda_class2: lambdas[1],
        shift_class1: shifts[0],
        shift_class2: shifts[1],
    })
}
