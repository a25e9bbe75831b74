//! CART-style binary classification tree, used both as the segmentation
//! model and as the baseline classifier.
//!
//! Splits are axis-aligned, `x[feature] <= threshold` goes left, and the
//! candidate thresholds are midpoints between consecutive distinct values.
//! Every split must leave at least `min_leaf_size` rows on each side, and a
//! node with fewer than `2 * min_leaf_size` rows is always a leaf. Leaves are
//! numbered `0..segment_count` in left-to-right depth-first order.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EncodedFeature};
use crate::error::{Error, Result};
use crate::par;
use crate::predict::Predict;

/// Gains within this margin are treated as equal, so ties resolve by the
/// fixed (feature, threshold) order instead of by rounding noise.
pub(crate) const GAIN_TIE_EPS: f64 = 1e-12;

// Below these sizes the parallel search and growth cost more than they save.
const PAR_SPLIT_WORK: usize = 1 << 15;
const PAR_GROW_ROWS: usize = 2048;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impurity {
    #[default]
    Gini,
    Entropy,
    Misclassification,
}

impl Impurity {
    /// Impurity of a node with the given class counts and (nonzero) total.
    #[inline]
    pub(crate) fn of(self, counts: &[usize], total: usize) -> f64 {
        let n = total as f64;
        match self {
            Impurity::Gini => {
                let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
                1.0 - sq / (n * n)
            }
            Impurity::Entropy => -counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n;
                    p * p.log2()
                })
                .sum::<f64>(),
            Impurity::Misclassification => {
                1.0 - counts.iter().copied().max().unwrap_or(0) as f64 / n
            }
        }
    }
}

impl FromStr for Impurity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(Impurity::Gini),
            "entropy" => Ok(Impurity::Entropy),
            "misclassification" => Ok(Impurity::Misclassification),
            other => Err(Error::param(format!("unknown impurity `{other}`"))),
        }
    }
}

impl fmt::Display for Impurity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Impurity::Gini => "gini",
            Impurity::Entropy => "entropy",
            Impurity::Misclassification => "misclassification",
        })
    }
}

/// Impurity of a node from its per-class counts.
pub fn impurity(class_counts: &[usize], kind: Impurity) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::param("impurity of an empty node"));
    }
    Ok(kind.of(class_counts, total))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf_size: usize,
    #[serde(default)]
    pub impurity: Impurity,
    #[serde(default)]
    pub max_depth: Option<usize>,
}

impl TreeParams {
    pub fn new(min_leaf_size: usize) -> Self {
        TreeParams {
            min_leaf_size,
            impurity: Impurity::Gini,
            max_depth: None,
        }
    }

    pub fn with_impurity(mut self, impurity: Impurity) -> Self {
        self.impurity = impurity;
        self
    }

    pub fn with_max_depth(mut self, max_depth: Option<usize>) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_leaf_size == 0 {
            return Err(Error::param("min_leaf_size must be at least 1"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::param("max_depth must be positive"));
        }
        Ok(())
    }
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams::new(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Parent impurity minus the size-weighted child impurities.
    pub decrease: f64,
}

impl Split {
    fn beats(&self, other: &Option<Split>) -> bool {
        other.map_or(true, |o| self.decrease > o.decrease + GAIN_TIE_EPS)
    }
}

pub(crate) fn class_counts(ds: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; ds.n_classes()];
    for &i in rows {
        counts[ds.label(i)] += 1;
    }
    counts
}

/// Midpoint of `lo < hi` that is guaranteed to satisfy `lo <= t < hi`.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Best split of `rows` on one feature, by a sorted sweep.
fn best_split_on_feature(
    ds: &Dataset,
    rows: &[usize],
    feature: usize,
    parent_counts: &[usize],
    parent_impurity: f64,
    params: &TreeParams,
) -> Option<Split> {
    let n = rows.len();
    let min_leaf = params.min_leaf_size;
    let mut pairs: Vec<(f64, usize)> = rows
        .iter()
        .map(|&i| (ds.value(i, feature), ds.label(i)))
        .collect();
    if pairs.iter().all(|p| p.0 == pairs[0].0) {
        return None;
    }
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut left = vec![0usize; parent_counts.len()];
    let mut right = parent_counts.to_vec();
    let mut best: Option<Split> = None;
    for pos in 0..n - 1 {
        let (v, y) = pairs[pos];
        left[y] += 1;
        right[y] -= 1;
        let n_left = pos + 1;
        if n_left < min_leaf {
            continue;
        }
        if n - n_left < min_leaf {
            break;
        }
        let next = pairs[pos + 1].0;
        if v == next {
            continue;
        }
        let weighted = (n_left as f64 * params.impurity.of(&left, n_left)
            + (n - n_left) as f64 * params.impurity.of(&right, n - n_left))
            / n as f64;
        let candidate = Split {
            feature,
            threshold: midpoint(v, next),
            decrease: parent_impurity - weighted,
        };
        if candidate.beats(&best) {
            best = Some(candidate);
        }
    }
    best
}

/// Exhaustive search for the split of `rows` with the largest impurity
/// decrease. Returns `None` when no admissible split has a positive decrease.
/// Ties go to the lower feature index, then the lower threshold.
pub fn best_split(ds: &Dataset, rows: &[usize], params: &TreeParams) -> Option<Split> {
    if rows.len() < 2 * params.min_leaf_size.max(1) {
        return None;
    }
    let counts = class_counts(ds, rows);
    let parent = params.impurity.of(&counts, rows.len());
    if parent <= GAIN_TIE_EPS {
        return None;
    }
    let d = ds.n_features();
    let per_feature = |j: usize| best_split_on_feature(ds, rows, j, &counts, parent, params);
    let candidates: Vec<Option<Split>> = if rows.len() * d >= PAR_SPLIT_WORK {
        par::map_range(d, per_feature)
    } else {
        (0..d).map(per_feature).collect()
    };
    let mut best = None;
    for c in candidates.into_iter().flatten() {
        if c.beats(&best) {
            best = Some(c);
        }
    }
    best.filter(|s| s.decrease > GAIN_TIE_EPS)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub segment_id: usize,
    pub size: usize,
    pub class_counts: Vec<usize>,
    pub proportions: Vec<f64>,
    pub majority_label: usize,
}

impl Leaf {
    fn from_counts(segment_id: usize, class_counts: Vec<usize>) -> Self {
        let size: usize = class_counts.iter().sum();
        let proportions = class_counts
            .iter()
            .map(|&c| if size > 0 { c as f64 / size as f64 } else { 0.0 })
            .collect();
        Leaf {
            segment_id,
            size,
            majority_label: argmax_first(&class_counts),
            class_counts,
            proportions,
        }
    }

    /// Largest class proportion.
    pub fn purity(&self) -> f64 {
        self.proportions[self.majority_label]
    }
}

/// Index of the first maximum.
pub(crate) fn argmax_first<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(Leaf),
}

enum Grown {
    Leaf(Vec<usize>),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Grown>,
        right: Box<Grown>,
    },
}

fn grow(ds: &Dataset, rows: Vec<usize>, depth: usize, params: &TreeParams) -> Grown {
    let counts = class_counts(ds, &rows);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_reached = params.max_depth.is_some_and(|m| depth >= m);
    if pure || depth_reached || rows.len() < 2 * params.min_leaf_size {
        return Grown::Leaf(counts);
    }
    let Some(split) = best_split(ds, &rows, params) else {
        return Grown::Leaf(counts);
    };
    let n = rows.len();
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| ds.value(i, split.feature) <= split.threshold);
    let (left, right) = if n >= PAR_GROW_ROWS {
        par::join(
            || grow(ds, left_rows, depth + 1, params),
            || grow(ds, right_rows, depth + 1, params),
        )
    } else {
        (
            grow(ds, left_rows, depth + 1, params),
            grow(ds, right_rows, depth + 1, params),
        )
    };
    Grown::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

fn flatten(grown: Grown, nodes: &mut Vec<Node>, leaves: &mut Vec<usize>) -> usize {
    let at = nodes.len();
    match grown {
        Grown::Leaf(counts) => {
            nodes.push(Node::Leaf(Leaf::from_counts(leaves.len(), counts)));
            leaves.push(at);
        }
        Grown::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            nodes.push(Node::Split {
                feature,
                threshold,
                left: 0,
                right: 0,
            });
            let l = flatten(*left, nodes, leaves);
            let r = flatten(*right, nodes, leaves);
            nodes[at] = Node::Split {
                feature,
                threshold,
                left: l,
                right: r,
            };
        }
    }
    at
}

/// A fitted tree, stored as a pre-order node arena rooted at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct DecisionTree {
    nodes: Vec<Node>,
    params: TreeParams,
    feature_names: Vec<EncodedFeature>,
    class_names: Vec<String>,
    /// Node index of each segment's leaf.
    leaves: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    params: TreeParams,
    feature_names: Vec<EncodedFeature>,
    class_names: Vec<String>,
    nodes: Vec<Node>,
}

impl From<DecisionTree> for TreeRepr {
    fn from(t: DecisionTree) -> Self {
        TreeRepr {
            params: t.params,
            feature_names: t.feature_names,
            class_names: t.class_names,
            nodes: t.nodes,
        }
    }
}

impl TryFrom<TreeRepr> for DecisionTree {
    type Error = Error;

    fn try_from(r: TreeRepr) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Model(format!("tree: {msg}")));
        if r.nodes.is_empty() {
            return bad("no nodes");
        }
        let d = r.feature_names.len();
        let k = r.class_names.len();
        let mut leaves = Vec::new();
        for (i, node) in r.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= d || !threshold.is_finite() {
                        return bad("split references an invalid feature or threshold");
                    }
                    if *left <= i || *right <= i || *left >= r.nodes.len() || *right >= r.nodes.len() {
                        return bad("child index out of order");
                    }
                }
                Node::Leaf(leaf) => {
                    if leaf.segment_id != leaves.len() {
                        return bad("segment ids not in depth-first order");
                    }
                    if leaf.class_counts.len() != k
                        || leaf.proportions.len() != k
                        || leaf.majority_label >= k
                    {
                        return bad("leaf class vector has the wrong length");
                    }
                    leaves.push(i);
                }
            }
        }
        Ok(DecisionTree {
            nodes: r.nodes,
            params: r.params,
            feature_names: r.feature_names,
            class_names: r.class_names,
            leaves,
        })
    }
}

impl DecisionTree {
    /// Grows a tree greedily on all rows of `ds`.
    pub fn fit(ds: &Dataset, params: &TreeParams) -> Result<Self> {
        params.validate()?;
        if ds.is_empty() {
            return Err(Error::InvalidData("cannot fit a tree on an empty dataset".into()));
        }
        let grown = grow(ds, (0..ds.n_rows()).collect(), 0, params);
        let mut nodes = Vec::new();
        let mut leaves = Vec::new();
        flatten(grown, &mut nodes, &mut leaves);
        Ok(DecisionTree {
            nodes,
            params: *params,
            feature_names: ds.feature_names().to_vec(),
            class_names: ds.class_names().to_vec(),
            leaves,
        })
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn segment_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature_names(&self) -> &[EncodedFeature] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn leaf(&self, segment_id: usize) -> &Leaf {
        match &self.nodes[self.leaves[segment_id]] {
            Node::Leaf(leaf) => leaf,
            Node::Split { .. } => unreachable!("leaf table points at a split"),
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Leaf> + '_ {
        (0..self.segment_count()).map(move |s| self.leaf(s))
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn route(&self, x: &[f64]) -> &Leaf {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf(leaf) => return leaf,
            }
        }
    }

    /// Segment id of the leaf that `x` routes to.
    pub fn segment_of(&self, x: &[f64]) -> Result<usize> {
        Error::check_dim(self.feature_names.len(), x.len())?;
        Ok(self.route(x).segment_id)
    }

    /// Segment id of every row of `ds`.
    pub fn segments(&self, ds: &Dataset) -> Result<Vec<usize>> {
        Error::check_dim(self.feature_names.len(), ds.n_features())?;
        Ok(par::map_range(ds.n_rows(), |i| self.route(ds.row(i)).segment_id))
    }

    /// Renders one line per leaf, in segment order:
    /// `predicates \t size \t proportions \t label`.
    pub fn export_rules(&self) -> String {
        let mut out = String::new();
        let mut path = Vec::new();
        self.write_rules(0, &mut path, &mut out);
        out
    }

    fn write_rules(&self, at: usize, path: &mut Vec<String>, out: &mut String) {
        match &self.nodes[at] {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let f = &self.feature_names[*feature];
                let (l, r) = match &f.level {
                    Some(level) if *threshold >= 0.0 && *threshold < 1.0 => (
                        format!("{}≠{}", f.source, level),
                        format!("{}={}", f.source, level),
                    ),
                    _ => (format!("{f} ≤ {threshold}"), format!("{f} > {threshold}")),
                };
                path.push(l);
                self.write_rules(*left, path, out);
                path.pop();
                path.push(r);
                self.write_rules(*right, path, out);
                path.pop();
            }
            Node::Leaf(leaf) => {
                let predicates = if path.is_empty() {
                    "TRUE".to_string()
                } else {
                    path.join(" AND ")
                };
                let props: Vec<String> = leaf.proportions.iter().map(f64::to_string).collect();
                let _ = writeln!(
                    out,
                    "{predicates}\t{}\t{}\t{}",
                    leaf.size,
                    props.join(","),
                    self.class_names[leaf.majority_label]
                );
            }
        }
    }
}

impl Predict for DecisionTree {
    fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    fn predict_row(&self, x: &[f64]) -> Result<usize> {
        Error::check_dim(self.feature_names.len(), x.len())?;
        Ok(self.route(x).majority_label)
    }
}

pub fn fit_tree(ds: &Dataset, params: &TreeParams) -> Result<DecisionTree> {
    DecisionTree::fit(ds, params)
}

pub fn segment_of(tree: &DecisionTree, x: &[f64]) -> Result<usize> {
    tree.segment_of(x)
}

/// Majority label of the leaf `x` routes to.
pub fn tree_predict(tree: &DecisionTree, x: &[f64]) -> Result<usize> {
    tree.predict_row(x)
}

pub fn export_rules(tree: &DecisionTree) -> String {
    tree.export_rules()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d() -> Dataset {
        Dataset::from_rows(
            &[vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            &[0, 0, 1, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn impurity_values() {
        assert_eq!(impurity(&[10, 0], Impurity::Gini).unwrap(), 0.0);
        assert!((impurity(&[5, 5], Impurity::Gini).unwrap() - 0.5).abs() < 1e-15);
        assert!((impurity(&[5, 5], Impurity::Entropy).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(impurity(&[10, 0], Impurity::Entropy).unwrap(), 0.0);
        assert!((impurity(&[3, 1], Impurity::Misclassification).unwrap() - 0.25).abs() < 1e-15);
        assert!(impurity(&[0, 0], Impurity::Gini).is_err());
    }

    #[test]
    fn best_split_one_d() {
        let ds = one_d();
        let s = best_split(&ds, &[0, 1, 2, 3], &TreeParams::new(1)).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
        assert!((s.decrease - 0.5).abs() < 1e-15);
    }

    #[test]
    fn best_split_none_cases() {
        let pure = Dataset::from_rows(&[vec![1.0], vec![2.0]], &[1, 1], 2).unwrap();
        assert!(best_split(&pure, &[0, 1], &TreeParams::new(1)).is_none());
        assert!(best_split(&one_d(), &[0, 1, 2, 3], &TreeParams::new(3)).is_none());
    }

    #[test]
    fn fit_pure_and_one_d() {
        let pure = Dataset::from_rows(&[vec![1.0], vec![2.0], vec![3.0]], &[1, 1, 1], 2).unwrap();
        let t = DecisionTree::fit(&pure, &TreeParams::new(1)).unwrap();
        assert_eq!(t.segment_count(), 1);
        assert_eq!(t.segment_of(&[100.0]).unwrap(), 0);

        let t = DecisionTree::fit(&one_d(), &TreeParams::new(1)).unwrap();
        assert_eq!(t.segment_count(), 2);
        assert_eq!(t.depth(), 1);
        assert!(t.leaves().all(|l| l.purity() == 1.0));
        assert_eq!(t.segment_of(&[1.0]).unwrap(), 0);
        assert_eq!(t.segment_of(&[2.5]).unwrap(), 0);
        assert_eq!(t.segment_of(&[2.6]).unwrap(), 1);
        assert_eq!(tree_predict(&t, &[3.0]).unwrap(), 1);
        assert!(matches!(
            t.segment_of(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn majority_tie_goes_to_lowest_class() {
        let leaf = Leaf::from_counts(0, vec![5, 5]);
        assert_eq!(leaf.majority_label, 0);
        let leaf = Leaf::from_counts(0, vec![1, 9]);
        assert_eq!(leaf.majority_label, 1);
        assert_eq!(leaf.proportions, vec![0.1, 0.9]);
    }

    #[test]
    fn max_depth_and_min_leaf_are_respected() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..40).map(|i| (i / 3) % 2).collect();
        let ds = Dataset::from_rows(&rows, &labels, 2).unwrap();
        let t = DecisionTree::fit(&ds, &TreeParams::new(1).with_max_depth(Some(2))).unwrap();
        assert!(t.depth() <= 2);
        let t = DecisionTree::fit(&ds, &TreeParams::new(4)).unwrap();
        assert!(t.leaves().all(|l| l.size >= 4));
        assert_eq!(t.leaves().map(|l| l.size).sum::<usize>(), 40);
    }

    #[test]
    fn rules_render_predicates() {
        let t = DecisionTree::fit(&one_d(), &TreeParams::new(1)).unwrap();
        let rules = t.export_rules();
        let lines: Vec<&str> = rules.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "x0 ≤ 2.5\t2\t1,0\t0");
        assert_eq!(lines[1], "x0 > 2.5\t2\t0,1\t1");

        let single = Dataset::from_rows(&[vec![1.0]], &[0], 1).unwrap();
        let t = DecisionTree::fit(&single, &TreeParams::new(1)).unwrap();
        assert_eq!(t.export_rules(), "TRUE\t1\t1\t0\n");
    }

    #[test]
    fn indicator_rules_use_equality() {
        let ds = Dataset::new(
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0, 1, 0, 1],
            vec![EncodedFeature::indicator("colour", "red")],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let t = DecisionTree::fit(&ds, &TreeParams::new(1)).unwrap();
        let rules = t.export_rules();
        assert!(rules.starts_with("colour≠red\t2\t0,1\tb\n"));
        assert!(rules.contains("colour=red\t2\t1,0\ta\n"));
    }

    #[test]
    fn serde_round_trip_validates() {
        let t = DecisionTree::fit(&one_d(), &TreeParams::new(1)).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: DecisionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let broken = json.replace("\"left\":1", "\"left\":0");
        assert!(serde_json::from_str::<DecisionTree>(&broken).is_err());
    }

    #[test]
    fn midpoint_stays_below_upper() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let m = midpoint(lo, hi);
        assert!(lo <= m && m < hi);
        assert_eq!(midpoint(2.0, 3.0), 2.5);
    }
}
