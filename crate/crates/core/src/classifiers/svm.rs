//! One-vs-rest linear SVM trained by mini-batch subgradient descent on
//!
//! ```text
//! J(w, b) = lambda/2 |w|^2 + 1/n sum_i max(0, 1 - y_i (w.x_i + b)),   lambda = 1 / (C n)
//! ```
//!
//! with `y_i` in {-1, +1}. Each weight vector stores the bias last.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from;

const BASE_STEP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    n_features: usize,
    /// One `d + 1` weight vector per class; `None` for classes absent in training.
    weights: Vec<Option<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

#[inline]
fn margin(w: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d]
}

/// The regularized hinge objective for targets `y` in {-1, +1}.
pub fn hinge_objective(w: &[f64], x: &[f64], y: &[f64], lambda: f64) -> f64 {
    let d = w.len() - 1;
    let hinge: f64 = x
        .chunks_exact(d)
        .zip(y)
        .map(|(row, &t)| (1.0 - t * margin(w, row)).max(0.0))
        .sum();
    0.5 * lambda * w[..d].iter().map(|v| v * v).sum::<f64>() + hinge / y.len() as f64
}

/// A subgradient of [`hinge_objective`]; equals the gradient wherever no
/// row sits exactly on its margin.
pub fn hinge_subgradient(w: &[f64], x: &[f64], y: &[f64], lambda: f64) -> Vec<f64> {
    let d = w.len() - 1;
    let rows: Vec<&[f64]> = x.chunks_exact(d).collect();
    let mut g = vec![0.0; w.len()];
    accumulate_subgradient(w, &rows, y, lambda, &mut g);
    g
}

fn accumulate_subgradient(w: &[f64], rows: &[&[f64]], y: &[f64], lambda: f64, g: &mut [f64]) {
    let d = w.len() - 1;
    let inv = 1.0 / rows.len() as f64;
    for j in 0..d {
        g[j] = lambda * w[j];
    }
    g[d] = 0.0;
    for (row, &t) in rows.iter().zip(y) {
        if t * margin(w, row) < 1.0 {
            for j in 0..d {
                g[j] -= t * row[j] * inv;
            }
            g[d] -= t * inv;
        }
    }
}

fn fit_binary(z: &[f64], targets: &[f64], d: usize, cfg: &SvmConfig, seed: u64) -> Vec<f64> {
    let n = targets.len();
    let lambda = 1.0 / (cfg.c * n as f64);
    let batch = cfg.batch_size.clamp(1, n.max(1));
    let mut w = vec![0.0; d + 1];
    let mut g = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_from(seed);
    let mut rows: Vec<&[f64]> = Vec::with_capacity(batch);
    let mut ys = Vec::with_capacity(batch);
    for epoch in 0..cfg.epochs {
        let step = BASE_STEP / ((1 + epoch) as f64).sqrt();
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            rows.clear();
            ys.clear();
            for &i in chunk {
                rows.push(&z[i * d..(i + 1) * d]);
                ys.push(targets[i]);
            }
            accumulate_subgradient(&w, &rows, &ys, lambda, &mut g);
            for (wj, gj) in w.iter_mut().zip(&g) {
                *wj -= step * gj;
            }
        }
    }
    w
}

impl LinearSvm {
    pub fn fit(
        z: &[f64],
        y: &[usize],
        n_features: usize,
        n_classes: usize,
        cfg: &SvmConfig,
        seed: u64,
    ) -> Self {
        let mut seen = vec![false; n_classes];
        y.iter().for_each(|&c| seen[c] = true);
        let weights = (0..n_classes)
            .map(|k| {
                seen[k].then(|| {
                    let targets: Vec<f64> = y.iter().map(|&c| if c == k { 1.0 } else { -1.0 }).collect();
                    fit_binary(z, &targets, n_features, cfg, crate::rng::derive_seed(seed, k as u64))
                })
            })
            .collect();
        LinearSvm {
            n_features,
            weights,
        }
    }

    /// Class with the largest one-vs-rest margin (ties: lowest id).
    pub fn predict(&self, z: &[f64]) -> usize {
        let mut best: Option<(usize, f64)> = None;
        for (k, w) in self.weights.iter().enumerate() {
            if let Some(w) = w {
                let m = margin(w, z);
                if best.map_or(true, |(_, b)| m > b) {
                    best = Some((k, m));
                }
            }
        }
        best.map_or(0, |(k, _)| k)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}
