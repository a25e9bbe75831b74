#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;

use augtree::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLUSTER_CENTERS: [(f64, f64); 4] = [(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0)];
/// Class pair used by the XOR inside each cluster.
pub const CLUSTER_CLASSES: [(usize, usize); 4] = [(0, 1), (2, 3), (0, 2), (1, 3)];

/// Offset in `±[1, 10]`, keeping a gap around the cluster's XOR axes.
fn offset(rng: &mut ChaCha8Rng) -> f64 {
    let r = rng.random_range(1.0..10.0);
    if rng.random::<bool>() {
        r
    } else {
        -r
    }
}

/// Four far-apart clusters in the plane. Inside each one the label is an XOR
/// of the signs of the offsets from the centre, drawn from a class pair that
/// differs between clusters, so the clusters are separable by axis splits
/// but each cluster is split 50/50 along any single axis.
pub fn xor_clusters(per_cluster: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(4 * per_cluster);
    let mut labels = Vec::with_capacity(4 * per_cluster);
    for c in 0..4 {
        let (cx, cy) = CLUSTER_CENTERS[c];
        let (a, b) = CLUSTER_CLASSES[c];
        for _ in 0..per_cluster {
            let (u, v) = (offset(&mut rng), offset(&mut rng));
            rows.push(vec![cx + u, cy + v]);
            labels.push(if (u > 0.0) ^ (v > 0.0) { b } else { a });
        }
    }
    Dataset::from_rows(&rows, &labels, 4).unwrap()
}

pub const SKEW_CELLS: usize = 20;
pub const SKEW_MIXED_CELLS: [usize; 2] = [4, 13];

/// Twenty cells along feature 0. Eighteen are pure class 0; cells
/// [`SKEW_MIXED_CELLS`] are 50/50 with label `x1 + x2 > 0`. Overall 95/5.
pub fn skewed_cells(per_cell: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for cell in 0..SKEW_CELLS {
        let mixed = SKEW_MIXED_CELLS.contains(&cell);
        for i in 0..per_cell {
            let x0 = cell as f64 * 10.0 + rng.random_range(0.0..5.0);
            let x1: f64 = rng.random_range(-1.0..1.0);
            // Balanced halves in mixed cells, the second feature placing the
            // row on the correct side of x1 + x2 = 0 with a margin.
            let label = usize::from(mixed && i % 2 == 1);
            let x2 = if mixed {
                let gap = rng.random_range(0.1..1.0);
                if label == 1 {
                    -x1 + gap
                } else {
                    -x1 - gap
                }
            } else {
                rng.random_range(-1.0..1.0)
            };
            rows.push(vec![x0, x1, x2]);
            labels.push(label);
        }
    }
    Dataset::from_rows(&rows, &labels, 2).unwrap()
}

/// Uniformly shuffled (train, test) split of `ds`.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> (Dataset, Dataset) {
    augtree::data::train_test_split(ds, test_fraction, seed).unwrap()
}

/// Directory holding the prepared CSV files: `$AUGTREE_DATA_DIR`, else the
/// workspace `data/` directory.
pub fn data_dir() -> PathBuf {
    std::env::var_os("AUGTREE_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
            dir.canonicalize().unwrap_or(dir)
        })
}
