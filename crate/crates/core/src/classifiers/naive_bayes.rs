use serde::{Deserialize, Serialize};

use crate::data::Dataset;

/// Relative variance floor; see [`GaussianNb::fit`].
pub const VAR_SMOOTHING: f64 = 1e-9;

/// Gaussian naive Bayes with per-class feature means and variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    n_features: usize,
    /// Class priors; zero for classes absent in training.
    priors: Vec<f64>,
    /// Row-major `K x d`.
    means: Vec<f64>,
    variances: Vec<f64>,
    /// Features with nonzero variance over the training rows. Constant
    /// features contribute the same term to every class and are skipped.
    active: Vec<usize>,
}

impl GaussianNb {
    /// Maximum-likelihood class moments. Each variance gets
    /// `VAR_SMOOTHING * (v_j + 1e-12)` added, where `v_j` is the variance of
    /// feature `j` over all training rows.
    pub fn fit(ds: &Dataset) -> Self {
        let d = ds.n_features();
        let k = ds.n_classes();
        let n = ds.n_rows() as f64;
        let counts = ds.class_counts();
        let mut means = vec![0.0; k * d];
        let mut global_mean = vec![0.0; d];
        for (row, &y) in ds.rows().zip(ds.labels()) {
            for j in 0..d {
                means[y * d + j] += row[j];
                global_mean[j] += row[j];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                means[c * d..(c + 1) * d]
                    .iter_mut()
                    .for_each(|m| *m /= counts[c] as f64);
            }
        }
        global_mean.iter_mut().for_each(|m| *m /= n);

        let mut variances = vec![0.0; k * d];
        let mut global_var = vec![0.0; d];
        for (row, &y) in ds.rows().zip(ds.labels()) {
            for j in 0..d {
                let c = row[j] - means[y * d + j];
                variances[y * d + j] += c * c;
                let g = row[j] - global_mean[j];
                global_var[j] += g * g;
            }
        }
        global_var.iter_mut().for_each(|v| *v /= n);
        let mut active = Vec::new();
        for j in 0..d {
            let first = ds.value(0, j);
            if (0..ds.n_rows()).any(|i| ds.value(i, j) != first) {
                active.push(j);
            }
        }
        for c in 0..k {
            for j in 0..d {
                let v = &mut variances[c * d + j];
                if counts[c] > 0 {
                    *v /= counts[c] as f64;
                }
                *v += VAR_SMOOTHING * (global_var[j] + 1e-12);
            }
        }
        GaussianNb {
            n_features: d,
            priors: counts.iter().map(|&c| c as f64 / n).collect(),
            means,
            variances,
            active,
        }
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Joint log-likelihood per class; `-inf` for classes absent in training.
    pub fn log_scores(&self, x: &[f64]) -> Vec<f64> {
        let d = self.n_features;
        self.priors
            .iter()
            .enumerate()
            .map(|(c, &prior)| {
                if prior == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let mut s = prior.ln();
                for &j in &self.active {
                    let var = self.variances[c * d + j];
                    let diff = x[j] - self.means[c * d + j];
                    s -= 0.5 * (std::f64::consts::TAU * var).ln() + diff * diff / (2.0 * var);
                }
                s
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let scores = self.log_scores(x);
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = c;
            }
        }
        best
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}
