//! Synthetic data with a known noisy band around the median.
//!
//! Features are standard normal. A latent score `s·(X·w) + 0.02·ε` with
//! geometric weights `w = (1, 0.1, 0.01, …)` drives a clean target
//! `100·exp(0.25·latent)`. Inside the band `b = noise_band_pct/100`, targets
//! with relative offset `r = t/median − 1` satisfying `b/2 < |r| < b` are
//! mirrored through the median (`t ↦ median·(1 − r)`) with probability ½.
//! Mirroring keeps the target distribution but flips class loyalty, so the
//! non-linearity peaks for windows reaching the band edge.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, stream};

pub const TARGET_COLUMN: &str = "y";

fn median(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn feature_weights(p: usize) -> Vec<f64> {
    (0..p).map(|j| 0.1f64.powi(j as i32)).collect()
}

pub fn generate_synthetic(n: usize, p: usize, noise_band_pct: f64, signal_strength: f64, seed: u64) -> Result<Dataset> {
    generate_with_weights(n, &feature_weights(p), noise_band_pct, signal_strength, seed)
}

/// Same recipe with explicit feature weights.
pub fn generate_with_weights(
    n: usize,
    weights: &[f64],
    noise_band_pct: f64,
    signal_strength: f64,
    seed: u64,
) -> Result<Dataset> {
    let p = weights.len();
    if n < 50 || p < 2 {
        return Err(Error::invalid("synthetic data needs n ≥ 50 and p ≥ 2"));
    }
    if !(0.0..100.0).contains(&noise_band_pct) || !signal_strength.is_finite() {
        return Err(Error::invalid("noise band must lie in [0, 100) and signal must be finite"));
    }
    let mut rng = rng::substream(seed, stream::SYNTHETIC, 0);
    let mut data = Vec::with_capacity(n * p);
    let mut target = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        let score: f64 = row.iter().zip(weights).map(|(x, w)| x * w).sum();
        let eps: f64 = StandardNormal.sample(&mut rng);
        let latent = signal_strength * score + 0.02 * eps;
        target.push(100.0 * (0.25 * latent).exp());
        data.extend(row);
    }
    let b = noise_band_pct / 100.0;
    if b > 0.0 {
        let med = median(&target);
        for t in &mut target {
            let r = *t / med - 1.0;
            let flip = rng.random::<f64>() < 0.5;
            if b / 2.0 < r.abs() && r.abs() < b && flip {
                *t = med * (1.0 - r);
            }
        }
    }
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    Dataset::new(names, Matrix::from_vec(n, p, data)?, target, "synthetic")
}
