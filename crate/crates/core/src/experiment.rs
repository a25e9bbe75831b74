//! Leaf-size sweeps: train/test accuracy of the plain tree and the
//! augmented model as the minimum leaf size varies.

use serde::Serialize;

use crate::augment::{AugmentParams, AugmentedModel};
use crate::data::{train_test_split, Dataset};
use crate::error::{Error, Result};
use crate::predict::Predict;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub leaf_size: usize,
    pub tree_train_acc: f64,
    pub tree_test_acc: f64,
    pub aug_train_acc: f64,
    pub aug_test_acc: f64,
    pub segments: usize,
}

/// Splits `ds` once (`test_fraction`, `seed`), then for every distinct leaf
/// size in ascending order fits the augmented model (and with it the plain
/// tree) using `base` with only the minimum leaf size changed.
pub fn leaf_size_sweep(
    ds: &Dataset,
    leaf_sizes: &[usize],
    base: &AugmentParams,
    test_fraction: f64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let (train, test) = train_test_split(ds, test_fraction, seed)?;
    sweep_on_split(&train, &test, leaf_sizes, base)
}

/// [`leaf_size_sweep`] on an explicit train/test pair.
pub fn sweep_on_split(
    train: &Dataset,
    test: &Dataset,
    leaf_sizes: &[usize],
    base: &AugmentParams,
) -> Result<Vec<SweepRow>> {
    let mut sizes = leaf_sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() {
        return Err(Error::param("no leaf sizes given"));
    }
    if sizes[0] == 0 {
        return Err(Error::param("leaf size must be positive"));
    }
    sizes
        .into_iter()
        .map(|leaf_size| {
            let mut params = base.clone();
            params.tree.min_leaf_size = leaf_size;
            let m = AugmentedModel::fit(train, &params)?;
            Ok(SweepRow {
                leaf_size,
                tree_train_acc: m.tree.accuracy(train)?,
                tree_test_acc: m.tree.accuracy(test)?,
                aug_train_acc: m.accuracy(train)?,
                aug_test_acc: m.accuracy(test)?,
                segments: m.segment_count(),
            })
        })
        .collect()
}
