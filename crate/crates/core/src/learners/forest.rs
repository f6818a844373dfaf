use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use crate::matrix::Matrix;
use crate::rng::{self, stream};

/// Bagged Gini trees with a random feature subset per split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    importance: Vec<f64>,
}

impl RandomForest {
    /// Tree `t` draws its bootstrap rows and feature subsets from the
    /// substream `(seed, TREE, t)`.
    pub fn fit(x: &Matrix, y: &[bool], n_trees: usize, mtry: usize, seed: u64) -> RandomForest {
        let params = TreeParams {
            max_features: Some(mtry.clamp(1, x.cols())),
            ..TreeParams::default()
        };
        let n = x.rows();
        let grown: Vec<(DecisionTree, Vec<f64>)> = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::substream(seed, stream::TREE, t as u64);
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut imp = vec![0.0; x.cols()];
                let tree = DecisionTree::fit(x, y, rows, &params, &mut rng, &mut imp);
                (tree, imp)
            })
            .collect();
        let mut importance = vec![0.0; x.cols()];
        for (_, imp) in &grown {
            for (a, b) in importance.iter_mut().zip(imp) {
                *a += b;
            }
        }
        RandomForest {
            trees: grown.into_iter().map(|(t, _)| t).collect(),
            importance,
        }
    }

    pub fn from_trees(trees: Vec<DecisionTree>, importance: Vec<f64>) -> RandomForest {
        RandomForest { trees, importance }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Gini decrease summed over every split of every tree.
    pub fn importance(&self) -> &[f64] {
        &self.importance
    }
}
