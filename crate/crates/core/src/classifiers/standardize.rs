use serde::{Deserialize, Serialize};

use crate::data::Dataset;

/// Per-feature affine rescaling to zero mean and unit variance.
///
/// Features that are constant on the fitting rows pass through unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(ds: &Dataset) -> Self {
        let d = ds.n_features();
        let n = ds.n_rows() as f64;
        let mut mean = vec![0.0; d];
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in ds.rows() {
            for j in 0..d {
                mean[j] += row[j];
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in ds.rows() {
            for j in 0..d {
                let c = row[j] - mean[j];
                var[j] += c * c;
            }
        }
        let mut scale = vec![1.0; d];
        for j in 0..d {
            let sd = (var[j] / n).sqrt();
            if lo[j] == hi[j] || sd == 0.0 {
                mean[j] = 0.0;
            } else {
                scale[j] = sd;
            }
        }
        Standardizer { mean, scale }
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn transform_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.extend(
            x.iter()
                .zip(self.mean.iter().zip(&self.scale))
                .map(|(v, (m, s))| (v - m) / s),
        );
    }

    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        self.transform_into(x, &mut out);
        out
    }

    /// Standardized copy of all rows, row-major.
    pub fn transform(&self, ds: &Dataset) -> Vec<f64> {
        let mut out = Vec::with_capacity(ds.n_rows() * ds.n_features());
        for row in ds.rows() {
            self.transform_into(row, &mut out);
        }
        out
    }
}
