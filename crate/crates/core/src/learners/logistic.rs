//! Ridge logistic regression fitted by iteratively reweighted least squares.
//!
//! The objective is the negative log-likelihood plus `ridge/2 · ‖β‖²`, where
//! the intercept is not penalized. Inputs are expected to be standardized.

use nalgebra::{DMatrix, DVector};

use crate::matrix::Matrix;

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct IrlsFit {
    /// Intercept first, then one coefficient per column.
    pub coef: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl IrlsFit {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        self.coef[0] + row.iter().zip(&self.coef[1..]).map(|(x, b)| x * b).sum::<f64>()
    }

    pub fn intercept(&self) -> f64 {
        self.coef[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coef[1..]
    }
}

#[inline]
pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^η)` without overflow.
#[inline]
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn eta(z: &Matrix, coef: &[f64], i: usize) -> f64 {
    coef[0] + z.row(i).iter().zip(&coef[1..]).map(|(x, b)| x * b).sum::<f64>()
}

pub fn penalized_objective(z: &Matrix, y: &[f64], coef: &[f64], ridge: f64) -> f64 {
    let nll: f64 = (0..z.rows())
        .map(|i| {
            let e = eta(z, coef, i);
            softplus(e) - y[i] * e
        })
        .sum();
    nll + 0.5 * ridge * coef[1..].iter().map(|b| b * b).sum::<f64>()
}

pub fn penalized_gradient(z: &Matrix, y: &[f64], coef: &[f64], ridge: f64) -> Vec<f64> {
    let p = z.cols();
    let mut g = vec![0.0; p + 1];
    for i in 0..z.rows() {
        let r = sigmoid(eta(z, coef, i)) - y[i];
        g[0] += r;
        for (gj, x) in g[1..].iter_mut().zip(z.row(i)) {
            *gj += r * x;
        }
    }
    for j in 1..=p {
        g[j] += ridge * coef[j];
    }
    g
}

fn newton_direction(z: &Matrix, y: &[f64], coef: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let n = z.rows();
    let d = z.cols() + 1;
    let mut h = DMatrix::<f64>::zeros(d, d);
    let mut x = vec![0.0; d];
    x[0] = 1.0;
    for i in 0..n {
        x[1..].copy_from_slice(z.row(i));
        let mu = sigmoid(eta(z, coef, i));
        let w = mu * (1.0 - mu);
        for a in 0..d {
            let wa = w * x[a];
            for b in 0..=a {
                h[(a, b)] += wa * x[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            h[(b, a)] = h[(a, b)];
        }
    }
    for j in 1..d {
        h[(j, j)] += ridge;
    }
    let g = DVector::from_vec(penalized_gradient(z, y, coef, ridge));
    let trace = (0..d).map(|j| h[(j, j)]).sum::<f64>().max(1.0);
    let mut jitter = 0.0;
    for _ in 0..8 {
        let mut hj = h.clone();
        for j in 0..d {
            hj[(j, j)] += jitter;
        }
        if let Some(ch) = hj.cholesky() {
            return Some(ch.solve(&g).iter().copied().collect());
        }
        jitter = if jitter == 0.0 { 1e-12 * trace } else { jitter * 100.0 };
    }
    None
}

/// Newton–Raphson (IRLS) with step halving. Stops once the objective changes
/// by less than [`TOLERANCE`] or after [`MAX_ITERATIONS`] steps.
pub fn fit_irls(z: &Matrix, y: &[f64], ridge: f64) -> IrlsFit {
    let mut coef = vec![0.0; z.cols() + 1];
    let mut obj = penalized_objective(z, y, &coef, ridge);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let Some(dir) = newton_direction(z, y, &coef, ridge) else {
            break;
        };
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = coef.iter().zip(&dir).map(|(c, d)| c - step * d).collect();
            let cand_obj = penalized_objective(z, y, &cand, ridge);
            if cand_obj <= obj {
                accepted = Some((cand, cand_obj));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cand_obj)) = accepted else {
            converged = true;
            break;
        };
        let delta = obj - cand_obj;
        coef = cand;
        obj = cand_obj;
        if delta < TOLERANCE {
            converged = true;
            break;
        }
    }
    IrlsFit {
        coef,
        iterations,
        converged,
    }
}
