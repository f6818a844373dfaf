use serde::{Deserialize, Serialize};

use crate::evalstats::metrics::auc_from_bools;
use crate::matrix::{sq_dist, Matrix, Standardizer};

/// k-nearest-neighbour classifier over z-scored training points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    scaler: Standardizer,
    train: Matrix,
    y: Vec<bool>,
    importance: Vec<f64>,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[bool], k: usize) -> Knn {
        let scaler = Standardizer::fit(x);
        let train = scaler.transform(x);
        let importance = (0..x.cols())
            .map(|j| {
                let auc = auc_from_bools(y, &x.column(j)).unwrap_or(0.5);
                auc.max(1.0 - auc)
            })
            .collect();
        Knn {
            k: k.clamp(1, x.rows()),
            scaler,
            train,
            y: y.to_vec(),
            importance,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Share of class1 among the `k` nearest training points; distance ties
    /// resolve to the lower training index.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut z = vec![0.0; row.len()];
        self.scaler.transform_row(row, &mut z);
        let mut d: Vec<(f64, usize)> = (0..self.train.rows())
            .map(|i| (sq_dist(&z, self.train.row(i)), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
        }
        let votes = d[..self.k].iter().filter(|(_, i)| self.y[*i]).count();
        votes as f64 / self.k as f64
    }

    /// Single-feature ROC-AUC folded to `max(auc, 1 − auc)`.
    pub fn importance(&self) -> &[f64] {
        &self.importance
    }
}
