//! Multinomial (softmax) logistic regression trained by mini-batch
//! gradient descent.
//!
//! Weights are a row-major `K x (d + 1)` matrix; the last column of each
//! row is the bias, which is not penalized.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    n_features: usize,
    n_classes: usize,
    weights: Vec<f64>,
    /// Classes present in the training rows; only these can be predicted.
    seen: Vec<bool>,
}

#[derive(Clone, Copy, Debug)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub batch_size: usize,
}

/// Writes the class scores `W [x; 1]` into `scores`.
#[inline]
fn scores_into(weights: &[f64], n_classes: usize, x: &[f64], scores: &mut [f64]) {
    let stride = x.len() + 1;
    for (k, s) in scores.iter_mut().enumerate().take(n_classes) {
        let w = &weights[k * stride..(k + 1) * stride];
        *s = w[..x.len()].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[x.len()];
    }
}

/// In-place softmax; returns log-sum-exp of the inputs.
#[inline]
fn softmax_in_place(scores: &mut [f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
    max + sum.ln()
}

/// Mean cross-entropy of the rows `x` (row-major, `d` columns) with labels
/// `y`, plus `l2 / 2` times the squared norm of the non-bias weights.
pub fn softmax_loss(weights: &[f64], n_classes: usize, x: &[f64], y: &[usize], l2: f64) -> f64 {
    let d = x.len() / y.len().max(1);
    let mut scores = vec![0.0; n_classes];
    let mut loss = 0.0;
    for (row, &label) in x.chunks_exact(d.max(1)).zip(y) {
        scores_into(weights, n_classes, &row[..d], &mut scores);
        let raw = scores[label];
        let lse = softmax_in_place(&mut scores);
        loss += lse - raw;
    }
    loss /= y.len() as f64;
    loss + 0.5 * l2 * penalty_norm(weights, d)
}

fn penalty_norm(weights: &[f64], d: usize) -> f64 {
    weights
        .chunks_exact(d + 1)
        .map(|w| w[..d].iter().map(|v| v * v).sum::<f64>())
        .sum()
}

/// Analytic gradient of [`softmax_loss`] with respect to the weights.
pub fn softmax_gradient(weights: &[f64], n_classes: usize, x: &[f64], y: &[usize], l2: f64) -> Vec<f64> {
    let d = x.len() / y.len().max(1);
    let mut grad = vec![0.0; weights.len()];
    let mut scores = vec![0.0; n_classes];
    let rows: Vec<&[f64]> = x.chunks_exact(d.max(1)).map(|r| &r[..d]).collect();
    accumulate_gradient(weights, n_classes, &rows, y, l2, &mut grad, &mut scores);
    grad
}

fn accumulate_gradient(
    weights: &[f64],
    n_classes: usize,
    rows: &[&[f64]],
    y: &[usize],
    l2: f64,
    grad: &mut [f64],
    scores: &mut [f64],
) {
    let d = weights.len() / n_classes - 1;
    let stride = d + 1;
    let inv = 1.0 / rows.len() as f64;
    grad.iter_mut().for_each(|g| *g = 0.0);
    for (row, &label) in rows.iter().zip(y) {
        scores_into(weights, n_classes, row, scores);
        softmax_in_place(scores);
        for k in 0..n_classes {
            let coef = (scores[k] - if k == label { 1.0 } else { 0.0 }) * inv;
            if coef == 0.0 {
                continue;
            }
            let g = &mut grad[k * stride..(k + 1) * stride];
            for (gj, xj) in g[..d].iter_mut().zip(row.iter()) {
                *gj += coef * xj;
            }
            g[d] += coef;
        }
    }
    for k in 0..n_classes {
        for j in 0..d {
            grad[k * stride + j] += l2 * weights[k * stride + j];
        }
    }
}

impl Logistic {
    /// Trains on standardized rows `z` (row-major) with labels `y`.
    pub fn fit(
        z: &[f64],
        y: &[usize],
        n_features: usize,
        n_classes: usize,
        cfg: &LogisticConfig,
        seed: u64,
    ) -> Self {
        let n = y.len();
        let stride = n_features + 1;
        let mut weights = vec![0.0; n_classes * stride];
        let mut grad = vec![0.0; weights.len()];
        let mut scores = vec![0.0; n_classes];
        let mut seen = vec![false; n_classes];
        y.iter().for_each(|&c| seen[c] = true);

        let batch = cfg.batch_size.clamp(1, n.max(1));
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = rng_from(seed);
        let mut rows: Vec<&[f64]> = Vec::with_capacity(batch);
        let mut labels = Vec::with_capacity(batch);
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                rows.clear();
                labels.clear();
                for &i in chunk {
                    rows.push(&z[i * n_features..(i + 1) * n_features]);
                    labels.push(y[i]);
                }
                accumulate_gradient(&weights, n_classes, &rows, &labels, cfg.l2, &mut grad, &mut scores);
                for (w, g) in weights.iter_mut().zip(&grad) {
                    *w -= cfg.learning_rate * g;
                }
            }
        }
        Logistic {
            n_features,
            n_classes,
            weights,
            seen,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest-scoring class among those seen in training (ties: lowest id).
    pub fn predict(&self, z: &[f64]) -> usize {
        let mut scores = vec![0.0; self.n_classes];
        scores_into(&self.weights, self.n_classes, z, &mut scores);
        let mut best: Option<usize> = None;
        for k in (0..self.n_classes).filter(|&k| self.seen[k]) {
            if best.map_or(true, |b| scores[k] > scores[b]) {
                best = Some(k);
            }
        }
        best.unwrap_or(0)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights_give_log_k_loss() {
        let w = vec![0.0; 3 * 3];
        let x = vec![1.0, 2.0, -1.0, 0.5];
        let loss = softmax_loss(&w, 3, &x, &[0, 2], 0.0);
        assert!((loss - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn separable_two_class_fit() {
        let mut z = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let a = (i as f64 - 19.5) / 10.0;
            z.extend([a, (i % 7) as f64 / 7.0 - 0.5]);
            y.push(usize::from(a > 0.0));
        }
        let cfg = LogisticConfig {
            learning_rate: 0.1,
            epochs: 200,
            l2: 1e-4,
            batch_size: 256,
        };
        let m = Logistic::fit(&z, &y, 2, 2, &cfg, 1);
        let hits = z
            .chunks_exact(2)
            .zip(&y)
            .filter(|(r, &t)| m.predict(r) == t)
            .count();
        assert_eq!(hits, 40);
    }

    #[test]
    fn unseen_classes_are_never_predicted() {
        let z = vec![0.0, 1.0];
        let m = Logistic::fit(
            &z,
            &[2, 2],
            1,
            3,
            &LogisticConfig {
                learning_rate: 0.1,
                epochs: 1,
                l2: 0.0,
                batch_size: 2,
            },
            0,
        );
        assert_eq!(m.predict(&[-5.0]), 2);
    }
}
