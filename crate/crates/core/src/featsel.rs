//! Feature ranking with extremely randomized trees, subset selection, and
//! the keep-or-revert check that only keeps a subset if it helps a plain tree.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cart::{DecisionTree, TreeParams};
use crate::data::{train_test_split, Dataset, EncodedFeature};
use crate::error::{Error, Result};
use crate::par;
use crate::predict::Predict;
use crate::rng::{derive_seed, rng_from};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraTreesParams {
    pub n_trees: usize,
    pub min_leaf_size: usize,
    /// Features drawn per split; `None` means `round(sqrt(d))`.
    pub candidates_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ExtraTreesParams {
    fn default() -> Self {
        ExtraTreesParams {
            n_trees: 100,
            min_leaf_size: 5,
            candidates_per_split: None,
            seed: 0,
        }
    }
}

impl ExtraTreesParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Candidates per split for `d` features.
    pub fn candidates(&self, d: usize) -> usize {
        self.candidates_per_split
            .unwrap_or_else(|| ((d as f64).sqrt().round() as usize).clamp(1, d.max(1)))
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::param("n_trees must be positive"));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::param("min_leaf_size must be positive"));
        }
        let m = self.candidates(d);
        if m == 0 || m > d {
            return Err(Error::param(format!("candidates_per_split {m} outside 1..={d}")));
        }
        Ok(())
    }
}

/// Normalized impurity-decrease importance per encoded feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    values: Vec<f64>,
    names: Vec<EncodedFeature>,
}

impl ImportanceVector {
    pub fn new(values: Vec<f64>, names: Vec<EncodedFeature>) -> Result<Self> {
        Error::check_dim(values.len(), names.len())?;
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("importances must be finite and non-negative"));
        }
        Ok(ImportanceVector { values, names })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[EncodedFeature] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Feature indices by descending importance, ties broken by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]).then(a.cmp(&b)));
        idx
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Grower<'a> {
    ds: &'a Dataset,
    min_leaf: usize,
    candidates: usize,
    n_total: f64,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.ds.n_classes()];
        rows.iter().for_each(|&i| c[self.ds.label(i)] += 1);
        c
    }

    /// Grows one tree over `rows`, adding each split's weighted impurity
    /// decrease to `importance`.
    fn grow(&self, rows: Vec<usize>, rng: &mut impl Rng, importance: &mut [f64]) {
        let d = self.ds.n_features();
        let mut features: Vec<usize> = (0..d).collect();
        let mut stack = vec![rows];
        while let Some(rows) = stack.pop() {
            let n = rows.len();
            let counts = self.counts(&rows);
            if n < 2 * self.min_leaf || counts.iter().filter(|&&c| c > 0).count() < 2 {
                continue;
            }
            let parent = gini(&counts, n);
            features.shuffle(rng);
            // (decrease, feature, threshold)
            let mut best: Option<(f64, usize, f64)> = None;
            let mut drawn = 0;
            for &j in &features {
                if drawn == self.candidates {
                    break;
                }
                let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let v = self.ds.value(i, j);
                    (lo.min(v), hi.max(v))
                });
                if lo >= hi {
                    continue;
                }
                drawn += 1;
                let mut t = rng.random_range(lo..hi);
                if t >= hi {
                    t = lo;
                }
                let mut left = vec![0; counts.len()];
                let mut n_left = 0;
                for &i in &rows {
                    if self.ds.value(i, j) <= t {
                        left[self.ds.label(i)] += 1;
                        n_left += 1;
                    }
                }
                let n_right = n - n_left;
                if n_left < self.min_leaf || n_right < self.min_leaf {
                    continue;
                }
                let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
                let decrease = parent
                    - (n_left as f64 / n as f64) * gini(&left, n_left)
                    - (n_right as f64 / n as f64) * gini(&right, n_right);
                if best.map_or(true, |(b, _, _)| decrease > b) {
                    best = Some((decrease, j, t));
                }
            }
            let Some((decrease, j, t)) = best else { continue };
            importance[j] += (n as f64 / self.n_total) * decrease.max(0.0);
            let (left, right): (Vec<usize>, Vec<usize>) =
                rows.into_iter().partition(|&i| self.ds.value(i, j) <= t);
            stack.push(right);
            stack.push(left);
        }
    }
}

/// Builds `p.n_trees` extremely randomized trees on all rows and returns the
/// normalized total gini decrease per feature. Tree `t` draws its randomness
/// from `derive_seed(p.seed, t)`, so the result does not depend on scheduling.
///
/// Candidate features are drawn without replacement among those that are not
/// constant within the node; each gets one threshold uniform on
/// `[min, max)`. Candidates leaving fewer than `min_leaf_size` rows on
/// either side are discarded.
pub fn fit_extra_trees(ds: &Dataset, p: &ExtraTreesParams) -> Result<ImportanceVector> {
    if ds.is_empty() {
        return Err(Error::InvalidData("empty dataset".into()));
    }
    let d = ds.n_features();
    p.validate(d)?;
    let grower = Grower {
        ds,
        min_leaf: p.min_leaf_size,
        candidates: p.candidates(d),
        n_total: ds.n_rows() as f64,
    };
    let per_tree = par::map_range(p.n_trees, |t| {
        let mut rng = rng_from(derive_seed(p.seed, t as u64));
        let mut imp = vec![0.0; d];
        grower.grow((0..ds.n_rows()).collect(), &mut rng, &mut imp);
        imp
    });
    let mut total = vec![0.0; d];
    for imp in &per_tree {
        total.iter_mut().zip(imp).for_each(|(a, b)| *a += b);
    }
    let sum: f64 = total.iter().sum();
    if sum > 0.0 {
        total.iter_mut().for_each(|v| *v /= sum);
    }
    ImportanceVector::new(total, ds.feature_names().to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelectionMode {
    TopK(usize),
    /// Keep features with importance strictly above the value.
    MinImportance(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectedFeatures {
    /// Indices by descending importance.
    pub indices: Vec<usize>,
    /// True when the importance cut-off removed everything and the single
    /// best feature was kept instead.
    pub fell_back: bool,
}

/// Ranks features by importance and truncates according to `mode`. Never
/// returns an empty list.
pub fn select_features(imp: &ImportanceVector, mode: SelectionMode) -> Result<SelectedFeatures> {
    if imp.is_empty() {
        return Err(Error::param("no features to select from"));
    }
    let ranking = imp.ranking();
    match mode {
        SelectionMode::TopK(0) => Err(Error::param("top_k must be positive")),
        SelectionMode::TopK(k) => Ok(SelectedFeatures {
            indices: ranking.into_iter().take(k).collect(),
            fell_back: false,
        }),
        SelectionMode::MinImportance(t) if t.is_nan() => Err(Error::param("min_importance is NaN")),
        SelectionMode::MinImportance(t) => {
            let kept: Vec<usize> = ranking.iter().copied().filter(|&j| imp.values[j] > t).collect();
            if kept.is_empty() {
                Ok(SelectedFeatures {
                    indices: vec![ranking[0]],
                    fell_back: true,
                })
            } else {
                Ok(SelectedFeatures {
                    indices: kept,
                    fell_back: false,
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetComparison {
    pub all_features_accuracy: f64,
    pub subset_accuracy: f64,
    /// True only if the subset strictly beats the full feature set.
    pub keep_subset: bool,
}

/// Fits a plain tree with all features and with `subset` on the same
/// train/validation split and reports which to keep.
pub fn compare_feature_subset(
    ds: &Dataset,
    subset: &[usize],
    tree: &TreeParams,
    validation_fraction: f64,
    seed: u64,
) -> Result<SubsetComparison> {
    let (train, valid) = train_test_split(ds, validation_fraction, seed)?;
    let all = DecisionTree::fit(&train, tree)?.accuracy(&valid)?;
    let sub_train = train.select_features(subset)?;
    let sub_valid = valid.select_features(subset)?;
    let sub = DecisionTree::fit(&sub_train, tree)?.accuracy(&sub_valid)?;
    Ok(SubsetComparison {
        all_features_accuracy: all,
        subset_accuracy: sub,
        keep_subset: sub > all,
    })
}
