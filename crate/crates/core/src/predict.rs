use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::par;

/// Anything that maps a feature row to a class id.
pub trait Predict: Sync {
    fn n_features(&self) -> usize;

    fn predict_row(&self, x: &[f64]) -> Result<usize>;

    fn predict(&self, ds: &Dataset) -> Result<Vec<usize>> {
        Error::check_dim(self.n_features(), ds.n_features())?;
        par::map_range(ds.n_rows(), |i| self.predict_row(ds.row(i))).into_iter().collect()
    }

    /// Fraction of rows of `ds` predicted correctly. Zero for an empty dataset.
    fn accuracy(&self, ds: &Dataset) -> Result<f64> {
        let predicted = self.predict(ds)?;
        Ok(accuracy(&predicted, ds.labels()))
    }
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    debug_assert_eq!(predicted.len(), truth.len());
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}
