//! The four classifier families, their tuning grids and their default
//! feature-importance measures.

pub mod forest;
pub mod knn;
pub mod logistic;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{class_counts, Class};
use crate::error::{Error, Result};
use crate::evalstats::bootstrap::draw_out_of_sample;
use crate::evalstats::metrics::auc;
use crate::matrix::{Matrix, Standardizer};
use crate::rng::{self, stream};

pub use forest::RandomForest;
pub use knn::Knn;
pub use tree::{DecisionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "rf")]
    RandomForest,
    #[serde(rename = "lr")]
    LogisticRegression,
    #[serde(rename = "cart")]
    Cart,
    #[serde(rename = "knn")]
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::RandomForest,
        ClassifierKind::LogisticRegression,
        ClassifierKind::Cart,
        ClassifierKind::Knn,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::LogisticRegression => "lr",
            ClassifierKind::Cart => "cart",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rf" | "randomforest" | "random_forest" => Ok(ClassifierKind::RandomForest),
            "lr" | "logistic" | "logisticregression" => Ok(ClassifierKind::LogisticRegression),
            "cart" => Ok(ClassifierKind::Cart),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::Config(format!("unknown classifier `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HyperParams {
    RandomForest { n_trees: usize, mtry: usize },
    LogisticRegression { ridge: f64 },
    Cart { cp: f64, min_samples_leaf: usize, min_samples_split: usize },
    Knn { k: usize },
}

impl HyperParams {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            HyperParams::RandomForest { .. } => ClassifierKind::RandomForest,
            HyperParams::LogisticRegression { .. } => ClassifierKind::LogisticRegression,
            HyperParams::Cart { .. } => ClassifierKind::Cart,
            HyperParams::Knn { .. } => ClassifierKind::Knn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Fitted {
    Logistic { scaler: Standardizer, fit: Vec<f64> },
    Tree(DecisionTree, Vec<f64>),
    Forest(RandomForest),
    Knn(Knn),
}

/// A fitted classifier. Probabilities are for class1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    params: HyperParams,
    n_features: usize,
    fitted: Fitted,
}

fn to_bools(labels: &[Class]) -> Vec<bool> {
    labels.iter().map(|c| c.is_positive()).collect()
}

fn check_training(features: &Matrix, labels: &[Class]) -> Result<()> {
    if features.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: features.rows(),
            actual: labels.len(),
        });
    }
    if features.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("features must be finite"));
    }
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

pub fn train(
    kind: ClassifierKind,
    features: &Matrix,
    labels: &[Class],
    params: &HyperParams,
    seed: u64,
) -> Result<TrainedModel> {
    if params.kind() != kind {
        return Err(Error::invalid(format!(
            "hyper-parameters for {} passed to {kind}",
            params.kind()
        )));
    }
    check_training(features, labels)?;
    let y = to_bools(labels);
    let fitted = match *params {
        HyperParams::LogisticRegression { ridge } => {
            let scaler = Standardizer::fit(features);
            let z = scaler.transform(features);
            let yf: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let fit = logistic::fit_irls(&z, &yf, ridge);
            Fitted::Logistic { scaler, fit: fit.coef }
        }
        HyperParams::Cart {
            cp,
            min_samples_leaf,
            min_samples_split,
        } => {
            let tp = TreeParams {
                min_samples_leaf,
                min_samples_split,
                cp,
                ..TreeParams::default()
            };
            let mut rng = rng::substream(seed, stream::TRAIN, 0);
            let mut imp = vec![0.0; features.cols()];
            let t = DecisionTree::fit(features, &y, (0..features.rows()).collect(), &tp, &mut rng, &mut imp);
            Fitted::Tree(t, imp)
        }
        HyperParams::RandomForest { n_trees, mtry } => {
            if n_trees == 0 {
                return Err(Error::invalid("random forest needs at least one tree"));
            }
            Fitted::Forest(RandomForest::fit(features, &y, n_trees, mtry, seed))
        }
        HyperParams::Knn { k } => {
            if k == 0 {
                return Err(Error::invalid("k must be positive"));
            }
            Fitted::Knn(Knn::fit(features, &y, k))
        }
    };
    Ok(TrainedModel {
        params: params.clone(),
        n_features: features.cols(),
        fitted,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.params.kind()
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Logistic regression with the given standardized-scale coefficients
    /// (intercept first).
    pub fn logistic_from_coefficients(scaler: Standardizer, coef: Vec<f64>, ridge: f64) -> TrainedModel {
        TrainedModel {
            params: HyperParams::LogisticRegression { ridge },
            n_features: coef.len() - 1,
            fitted: Fitted::Logistic { scaler, fit: coef },
        }
    }

    pub fn forest_from_trees(trees: Vec<DecisionTree>, importance: Vec<f64>) -> TrainedModel {
        let n_features = trees.first().map_or(importance.len(), DecisionTree::n_features);
        TrainedModel {
            params: HyperParams::RandomForest {
                n_trees: trees.len(),
                mtry: n_features,
            },
            n_features,
            fitted: Fitted::Forest(RandomForest::from_trees(trees, importance)),
        }
    }

    /// Logistic coefficients on the standardized scale, intercept first.
    pub fn logistic_coefficients(&self) -> Option<&[f64]> {
        match &self.fitted {
            Fitted::Logistic { fit, .. } => Some(fit),
            _ => None,
        }
    }

    pub fn tree(&self) -> Option<&DecisionTree> {
        match &self.fitted {
            Fitted::Tree(t, _) => Some(t),
            _ => None,
        }
    }

    fn predict_row(&self, row: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match &self.fitted {
            Fitted::Logistic { scaler, fit } => {
                scratch.resize(row.len(), 0.0);
                scaler.transform_row(row, scratch);
                let eta = fit[0] + scratch.iter().zip(&fit[1..]).map(|(x, b)| x * b).sum::<f64>();
                logistic::sigmoid(eta)
            }
            Fitted::Tree(t, _) => t.predict_row(row),
            Fitted::Forest(f) => f.predict_row(row),
            Fitted::Knn(k) => k.predict_row(row),
        }
    }

    /// P(class1) for every row.
    pub fn predict_proba(&self, features: &Matrix) -> Result<Vec<f64>> {
        if features.cols() != self.n_features {
            return Err(Error::LengthMismatch {
                expected: self.n_features,
                actual: features.cols(),
            });
        }
        Ok((0..features.rows())
            .into_par_iter()
            .map_init(Vec::new, |scratch, i| self.predict_row(features.row(i), scratch))
            .collect())
    }

    /// Default importance per feature: Gini decrease (RF, CART), absolute
    /// standardized coefficient (LR), folded single-feature AUC (KNN).
    pub fn feature_importance(&self) -> Vec<f64> {
        match &self.fitted {
            Fitted::Logistic { fit, .. } => fit[1..].iter().map(|b| b.abs()).collect(),
            Fitted::Tree(_, imp) => imp.clone(),
            Fitted::Forest(f) => f.importance().to_vec(),
            Fitted::Knn(k) => k.importance().to_vec(),
        }
    }
}

pub fn feature_importance(model: &TrainedModel) -> Vec<f64> {
    model.feature_importance()
}

pub fn predict_proba(model: &TrainedModel, features: &Matrix) -> Result<Vec<f64>> {
    model.predict_proba(features)
}

// ---------------------------------------------------------------------------
// Tuning

/// Candidate hyper-parameters per classifier and the inner bootstrap budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid {
    pub lr_ridge: Vec<f64>,
    pub cart_cp: Vec<f64>,
    pub cart_min_samples_leaf: usize,
    pub cart_min_samples_split: usize,
    pub knn_k: Vec<usize>,
    pub rf_n_trees: usize,
    /// `None` derives `{⌈√p⌉, ⌈p/3⌉, p}` from the feature count.
    pub rf_mtry: Option<Vec<usize>>,
    pub inner_bootstraps: usize,
}

impl Default for TuningGrid {
    fn default() -> Self {
        TuningGrid {
            lr_ridge: vec![1e-8, 1e-4, 1e-2, 1.0],
            cart_cp: vec![1e-4, 1e-3, 1e-2, 0.1],
            cart_min_samples_leaf: 7,
            cart_min_samples_split: 20,
            knn_k: vec![1, 3, 5, 7, 9, 11, 15, 21],
            rf_n_trees: 100,
            rf_mtry: None,
            inner_bootstraps: 10,
        }
    }
}

pub fn default_mtry_grid(p: usize) -> Vec<usize> {
    let sqrt = (p as f64).sqrt().ceil() as usize;
    let third = p.div_ceil(3);
    let mut out = Vec::new();
    for m in [sqrt, third, p] {
        let m = m.clamp(1, p.max(1));
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

impl TuningGrid {
    pub fn candidates(&self, kind: ClassifierKind, n_features: usize) -> Vec<HyperParams> {
        match kind {
            ClassifierKind::LogisticRegression => self
                .lr_ridge
                .iter()
                .map(|&ridge| HyperParams::LogisticRegression { ridge })
                .collect(),
            ClassifierKind::Cart => self
                .cart_cp
                .iter()
                .map(|&cp| HyperParams::Cart {
                    cp,
                    min_samples_leaf: self.cart_min_samples_leaf,
                    min_samples_split: self.cart_min_samples_split,
                })
                .collect(),
            ClassifierKind::Knn => self.knn_k.iter().map(|&k| HyperParams::Knn { k }).collect(),
            ClassifierKind::RandomForest => self
                .rf_mtry
                .clone()
                .unwrap_or_else(|| default_mtry_grid(n_features))
                .into_iter()
                .map(|mtry| HyperParams::RandomForest {
                    n_trees: self.rf_n_trees,
                    mtry,
                })
                .collect(),
        }
    }

    /// The first candidate, used when tuning is skipped.
    pub fn first(&self, kind: ClassifierKind, n_features: usize) -> Result<HyperParams> {
        self.candidates(kind, n_features)
            .into_iter()
            .next()
            .ok_or_else(|| Error::Config(format!("empty tuning grid for {kind}")))
    }
}

/// Pick the candidate with the best mean out-of-bag AUC over the inner
/// bootstrap. Every candidate sees the same resamples; ties keep grid order.
pub fn tune(
    kind: ClassifierKind,
    features: &Matrix,
    labels: &[Class],
    grid: &TuningGrid,
    seed: u64,
) -> Result<HyperParams> {
    check_training(features, labels)?;
    let candidates = grid.candidates(kind, features.cols());
    match candidates.len() {
        0 => return Err(Error::Config(format!("empty tuning grid for {kind}"))),
        1 => return Ok(candidates[0].clone()),
        _ => {}
    }
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..grid.inner_bootstraps.max(1))
        .map(|b| {
            let mut rng = rng::substream(seed, stream::TUNE, b as u64);
            draw_out_of_sample(labels, &mut rng, 10).map(|(s, _)| s)
        })
        .collect::<Result<_>>()?;

    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|params| -> Result<f64> {
            let mut total = 0.0;
            for (b, (train_rows, test_rows)) in splits.iter().enumerate() {
                let xtr = features.select_rows(train_rows);
                let ytr: Vec<Class> = train_rows.iter().map(|&i| labels[i]).collect();
                let model = train(kind, &xtr, &ytr, params, rng::derive_seed(seed, stream::TRAIN, b as u64))?;
                let xte = features.select_rows(test_rows);
                let yte: Vec<Class> = test_rows.iter().map(|&i| labels[i]).collect();
                total += auc(&yte, &model.predict_proba(&xte)?)?;
            }
            Ok(total / splits.len() as f64)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok(candidates[best].clone())
}
