//! The augmented decision tree: a CART tree segments the data, and each
//! segment whose class mix is not (nearly) pure gets the best classifier
//! from a pool, chosen by cross-validation on that segment's rows.
//!
//! Also home to the per-segment evaluation report, problematic-segment
//! flagging, segment profiles, and the Hoeffding sample-size bound.

use serde::{Deserialize, Serialize};

use crate::cart::{DecisionTree, TreeParams};
use crate::classifiers::{fit_classifier, select_best, ClassifierSpec, TrainedClassifier};
use crate::data::{make_folds, Dataset};
use crate::error::{Error, Result};
use crate::par;
use crate::predict::Predict;
use crate::rng::derive_seed;

pub const DEFAULT_CV_FOLDS: usize = 5;
pub const DEFAULT_HOMOGENEITY: f64 = 0.98;
pub const DEFAULT_FLAG_THRESHOLD: f64 = 0.6;
pub const DEFAULT_MIN_FLAG_SIZE: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    pub tree: TreeParams,
    pub pool: Vec<ClassifierSpec>,
    pub cv_folds: usize,
    pub homogeneity_threshold: f64,
    pub seed: u64,
}

impl AugmentParams {
    /// Default pool, 5 folds, homogeneity 0.98, seed 0.
    pub fn new(tree: TreeParams) -> Self {
        AugmentParams {
            tree,
            pool: ClassifierSpec::default_pool(),
            cv_folds: DEFAULT_CV_FOLDS,
            homogeneity_threshold: DEFAULT_HOMOGENEITY,
            seed: 0,
        }
    }

    pub fn with_pool(mut self, pool: Vec<ClassifierSpec>) -> Self {
        self.pool = pool;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cv_folds(mut self, folds: usize) -> Self {
        self.cv_folds = folds;
        self
    }

    pub fn with_homogeneity(mut self, threshold: f64) -> Self {
        self.homogeneity_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.tree.validate()?;
        if self.cv_folds < 2 {
            return Err(Error::param("cv_folds must be at least 2"));
        }
        if !(self.homogeneity_threshold > 0.5 && self.homogeneity_threshold <= 1.0) {
            return Err(Error::param(format!(
                "homogeneity threshold {} outside (0.5, 1]",
                self.homogeneity_threshold
            )));
        }
        if self.pool.is_empty() {
            return Err(Error::param("empty classifier pool"));
        }
        self.pool.iter().try_for_each(ClassifierSpec::validate)
    }

    /// The pool with `majority` first (inserted if absent) and duplicates removed,
    /// so the tree's own labelling wins selection ties.
    pub fn normalized_pool(&self) -> Vec<ClassifierSpec> {
        let mut pool = vec![ClassifierSpec::Majority];
        for spec in &self.pool {
            if !pool.contains(spec) {
                pool.push(*spec);
            }
        }
        pool
    }
}

/// What the model knows about one segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentModel {
    pub segment_id: usize,
    pub homogeneous: bool,
    pub chosen: ClassifierSpec,
    /// Absent for homogeneous segments, which use the tree label.
    pub trained: Option<TrainedClassifier>,
    /// CV accuracy per (normalized) pool member; empty for homogeneous segments.
    pub cv_scores: Vec<f64>,
    pub train_size: usize,
}

impl SegmentModel {
    /// Best cross-validated training accuracy across the pool. For a
    /// homogeneous segment this is the majority-class proportion.
    pub fn best_training_score(&self, tree: &DecisionTree) -> f64 {
        if self.cv_scores.is_empty() {
            tree.leaf(self.segment_id).purity()
        } else {
            self.cv_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentedModel {
    pub tree: DecisionTree,
    pub segments: Vec<SegmentModel>,
    pub params: AugmentParams,
}

fn group_by_segment(segments: &[usize], n_segments: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); n_segments];
    for (row, &s) in segments.iter().enumerate() {
        groups[s].push(row);
    }
    groups
}

fn fit_segment(
    train: &Dataset,
    tree: &DecisionTree,
    rows: &[usize],
    segment_id: usize,
    pool: &[ClassifierSpec],
    params: &AugmentParams,
) -> Result<SegmentModel> {
    let leaf = tree.leaf(segment_id);
    if leaf.purity() >= params.homogeneity_threshold || rows.len() < 2 {
        return Ok(SegmentModel {
            segment_id,
            homogeneous: true,
            chosen: ClassifierSpec::Majority,
            trained: None,
            cv_scores: Vec::new(),
            train_size: rows.len(),
        });
    }
    let seed = derive_seed(params.seed, segment_id as u64);
    let data = train.subset(rows);
    let folds = make_folds(rows.len(), params.cv_folds.min(rows.len()), seed)?;
    let selection = select_best(&data, pool, &folds, seed)?;
    let trained = fit_classifier(&selection.spec, &data, seed)?;
    Ok(SegmentModel {
        segment_id,
        homogeneous: false,
        chosen: selection.spec,
        trained: Some(trained),
        cv_scores: selection.scores,
        train_size: rows.len(),
    })
}

impl AugmentedModel {
    /// Fits the segmentation tree, then a leaf classifier for every
    /// non-homogeneous segment. Segments are processed independently, each
    /// seeded from `(params.seed, segment_id)`.
    pub fn fit(train: &Dataset, params: &AugmentParams) -> Result<Self> {
        params.validate()?;
        let tree = DecisionTree::fit(train, &params.tree)?;
        Self::fit_with_tree(train, tree, params)
    }

    /// Like [`AugmentedModel::fit`] but reuses an already fitted tree.
    pub fn fit_with_tree(train: &Dataset, tree: DecisionTree, params: &AugmentParams) -> Result<Self> {
        params.validate()?;
        let pool = params.normalized_pool();
        let groups = group_by_segment(&tree.segments(train)?, tree.segment_count());
        let segments = par::map_range(tree.segment_count(), |s| {
            fit_segment(train, &tree, &groups[s], s, &pool, params)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut params = params.clone();
        params.pool = pool;
        Ok(AugmentedModel {
            tree,
            segments,
            params,
        })
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    fn predict_routed(&self, x: &[f64]) -> (usize, usize, usize) {
        let segment = self.tree.segment_of(x).expect("dimension checked by caller");
        let tree_label = self.tree.leaf(segment).majority_label;
        let label = match &self.segments[segment].trained {
            Some(c) => c.predict_row(x).expect("dimension checked by caller"),
            None => tree_label,
        };
        (segment, tree_label, label)
    }

    /// `(segment, tree label, augmented label)` for every row of `ds`.
    pub fn route_all(&self, ds: &Dataset) -> Result<Vec<(usize, usize, usize)>> {
        Error::check_dim(self.n_features(), ds.n_features())?;
        Ok(par::map_range(ds.n_rows(), |i| self.predict_routed(ds.row(i))))
    }

    /// Routes raw feature rows (row-major) and returns `(segment, label)` pairs.
    pub fn predict_rows(&self, values: &[f64], n_features: usize) -> Result<Vec<(usize, usize)>> {
        Error::check_dim(self.n_features(), n_features)?;
        let rows: Vec<&[f64]> = if n_features == 0 {
            Vec::new()
        } else {
            values.chunks_exact(n_features).collect()
        };
        Ok(par::map_slice(&rows, |x| {
            let (s, _, y) = self.predict_routed(x);
            (s, y)
        }))
    }
}

impl Predict for AugmentedModel {
    fn n_features(&self) -> usize {
        self.tree.feature_names().len()
    }

    fn predict_row(&self, x: &[f64]) -> Result<usize> {
        Error::check_dim(self.n_features(), x.len())?;
        Ok(self.predict_routed(x).2)
    }
}

pub fn fit_augmented(train: &Dataset, params: &AugmentParams) -> Result<AugmentedModel> {
    AugmentedModel::fit(train, params)
}

/// Routes `x` through the tree; homogeneous segments answer with the tree
/// label, the rest with their leaf classifier.
pub fn predict_augmented(m: &AugmentedModel, x: &[f64]) -> Result<usize> {
    m.predict_row(x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentStats {
    pub segment_id: usize,
    pub test_size: usize,
    pub tree_correct: usize,
    pub augmented_correct: usize,
    /// `None` when no test row reached the segment.
    pub tree_accuracy: Option<f64>,
    pub augmented_accuracy: Option<f64>,
    /// Class proportions of the test rows routed here (all zero if none).
    pub class_profile: Vec<f64>,
    pub homogeneous: bool,
    pub chosen: String,
    pub best_training_score: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportSummary {
    pub test_rows: usize,
    pub tree_accuracy: f64,
    pub augmented_accuracy: f64,
    /// Augmented accuracy over test rows outside flagged segments;
    /// `None` if every row is flagged.
    pub filtered_accuracy: Option<f64>,
    pub flagged_fraction: f64,
    pub flagged_segments: usize,
    pub flag_threshold: f64,
    pub min_flag_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentReport {
    pub segments: Vec<SegmentStats>,
    pub overall: ReportSummary,
}

/// Scores `test` per segment and flags problematic segments.
///
/// A segment is flagged when its augmented test accuracy and the best
/// cross-validated training accuracy of every pool member are both below
/// `flag_threshold`, and it received at least `min_flag_size` test rows.
pub fn evaluate(
    m: &AugmentedModel,
    test: &Dataset,
    flag_threshold: f64,
    min_flag_size: usize,
) -> Result<SegmentReport> {
    if test.is_empty() {
        return Err(Error::InvalidData("empty test set".into()));
    }
    let routed = m.route_all(test)?;
    let k = test.n_classes();
    let n_seg = m.segment_count();
    let mut size = vec![0usize; n_seg];
    let mut tree_hits = vec![0usize; n_seg];
    let mut aug_hits = vec![0usize; n_seg];
    let mut class_counts = vec![vec![0usize; k]; n_seg];
    for (i, &(s, tree_label, label)) in routed.iter().enumerate() {
        let y = test.label(i);
        size[s] += 1;
        tree_hits[s] += usize::from(tree_label == y);
        aug_hits[s] += usize::from(label == y);
        class_counts[s][y] += 1;
    }

    let mut segments = Vec::with_capacity(n_seg);
    for s in 0..n_seg {
        let n = size[s];
        let ratio = |hits: usize| (n > 0).then(|| hits as f64 / n as f64);
        let best = m.segments[s].best_training_score(&m.tree);
        let aug_acc = ratio(aug_hits[s]);
        let flagged = n >= min_flag_size
            && n > 0
            && aug_acc.is_some_and(|a| a < flag_threshold)
            && best < flag_threshold;
        segments.push(SegmentStats {
            segment_id: s,
            test_size: n,
            tree_correct: tree_hits[s],
            augmented_correct: aug_hits[s],
            tree_accuracy: ratio(tree_hits[s]),
            augmented_accuracy: aug_acc,
            class_profile: class_counts[s]
                .iter()
                .map(|&c| if n > 0 { c as f64 / n as f64 } else { 0.0 })
                .collect(),
            homogeneous: m.segments[s].homogeneous,
            chosen: m.segments[s].chosen.kind().to_string(),
            best_training_score: best,
            flagged,
        });
    }

    let total = test.n_rows();
    let sum = |f: fn(&SegmentStats) -> usize| segments.iter().map(f).sum::<usize>();
    let flagged_rows: usize = segments.iter().filter(|s| s.flagged).map(|s| s.test_size).sum();
    let kept_hits: usize = segments
        .iter()
        .filter(|s| !s.flagged)
        .map(|s| s.augmented_correct)
        .sum();
    let overall = ReportSummary {
        test_rows: total,
        tree_accuracy: sum(|s| s.tree_correct) as f64 / total as f64,
        augmented_accuracy: sum(|s| s.augmented_correct) as f64 / total as f64,
        filtered_accuracy: (flagged_rows < total)
            .then(|| kept_hits as f64 / (total - flagged_rows) as f64),
        flagged_fraction: flagged_rows as f64 / total as f64,
        flagged_segments: segments.iter().filter(|s| s.flagged).count(),
        flag_threshold,
        min_flag_size,
    };
    Ok(SegmentReport { segments, overall })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentProfile {
    pub segment_id: usize,
    pub size: usize,
    pub proportions: Vec<f64>,
}

/// Class mix of the rows of `ds` routed to each segment, in segment order.
/// Segments that receive no rows are omitted.
pub fn segment_profiles(m: &AugmentedModel, ds: &Dataset) -> Result<Vec<SegmentProfile>> {
    if ds.is_empty() {
        return Err(Error::InvalidData("empty dataset".into()));
    }
    let segs = m.tree.segments(ds)?;
    let mut counts = vec![vec![0usize; ds.n_classes()]; m.segment_count()];
    for (i, &s) in segs.iter().enumerate() {
        counts[s][ds.label(i)] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .filter_map(|(segment_id, c)| {
            let size: usize = c.iter().sum();
            (size > 0).then(|| SegmentProfile {
                segment_id,
                size,
                proportions: c.iter().map(|&v| v as f64 / size as f64).collect(),
            })
        })
        .collect())
}

/// Smallest `n` with `n >= ln(2 / delta) / (2 epsilon^2)`: enough rows for the
/// empirical 0-1 risk to be within `epsilon` of the true risk with
/// probability at least `1 - delta`.
pub fn hoeffding_sample_size(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta must be in (0, 1), got {delta}")));
    }
    let n = (2.0 / delta).ln() / (2.0 * epsilon * epsilon);
    Ok((n.ceil() as u64).max(1))
}

/// Fraction of rows of `ds` that `c` misclassifies (mean 0-1 loss).
pub fn empirical_risk<P: Predict + ?Sized>(c: &P, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::InvalidData("empirical risk of an empty dataset".into()));
    }
    Ok(1.0 - c.accuracy(ds)?)
}
