use serde::{Deserialize, Serialize};

use crate::cart::argmax_first;

/// Brute-force k-nearest-neighbour vote over stored (already standardized) rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    n_features: usize,
    n_classes: usize,
    rows: Vec<f64>,
    labels: Vec<usize>,
}

impl Knn {
    /// `k` is clamped to the number of stored rows.
    pub fn new(k: usize, n_features: usize, n_classes: usize, rows: Vec<f64>, labels: Vec<usize>) -> Self {
        debug_assert_eq!(rows.len(), labels.len() * n_features);
        Knn {
            k: k.clamp(1, labels.len().max(1)),
            n_features,
            n_classes,
            rows,
            labels,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Majority label among the `k` nearest rows by Euclidean distance.
    /// Distance ties go to the lower row index, vote ties to the lower class id.
    pub fn predict(&self, z: &[f64]) -> usize {
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .chunks_exact(self.n_features)
            .enumerate()
            .map(|(i, r)| (squared_distance(r, z), i))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
        }
        let mut votes = vec![0usize; self.n_classes];
        for &(_, i) in &dist[..self.k] {
            votes[self.labels[i]] += 1;
        }
        argmax_first(&votes)
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vote_of_three() {
        let rows = vec![0.0, 1.0, 2.0, 10.0];
        let knn = Knn::new(3, 1, 2, rows, vec![1, 1, 0, 0]);
        assert_eq!(knn.predict(&[0.5]), 1);
        assert_eq!(knn.predict(&[9.0]), 0);
    }

    #[test]
    fn k_clamps_and_ties() {
        let knn = Knn::new(10, 1, 2, vec![0.0, 2.0], vec![1, 0]);
        assert_eq!(knn.k(), 2);
        // one vote each: lowest class id wins
        assert_eq!(knn.predict(&[0.0]), 0);
        // equidistant single neighbour: lower row index wins
        let knn = Knn::new(1, 1, 2, vec![0.0, 2.0], vec![1, 0]);
        assert_eq!(knn.predict(&[1.0]), 1);
    }
}
