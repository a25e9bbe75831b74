//! Randomized checks against brute-force oracles and structural invariants,
//! written against `TestRunner` so the acceptance binary can run them too.

use augtree::augment::{AugmentParams, AugmentedModel};
use augtree::cart::{best_split, DecisionTree, Impurity, TreeParams};
use augtree::classifiers::logistic::{softmax_gradient, softmax_loss};
use augtree::classifiers::svm::{hinge_objective, hinge_subgradient};
use augtree::classifiers::{fit_classifier, ClassifierSpec};
use augtree::featsel::{fit_extra_trees, ExtraTreesParams};
use std::io::Cursor;

use augtree::data::{Encoding, Schema};
use augtree::model_file::{ModelFile, TrainingInfo};
use augtree::{Dataset, Predict};
use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIE: f64 = 1e-12;

fn dataset_strategy(
    rows: std::ops::RangeInclusive<usize>,
    features: std::ops::RangeInclusive<usize>,
    classes: std::ops::RangeInclusive<usize>,
    max_value: i32,
) -> impl Strategy<Value = Dataset> {
    (rows, features, classes).prop_flat_map(move |(n, d, k)| {
        (
            prop::collection::vec(prop::collection::vec(0..=max_value, d), n),
            prop::collection::vec(0..k, n),
        )
            .prop_map(move |(rows, labels)| {
                let rows: Vec<Vec<f64>> = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(f64::from).collect())
                    .collect();
                Dataset::from_rows(&rows, &labels, k).unwrap()
            })
    })
}

fn impurity_strategy() -> impl Strategy<Value = Impurity> {
    prop_oneof![
        Just(Impurity::Gini),
        Just(Impurity::Entropy),
        Just(Impurity::Misclassification)
    ]
}

fn oracle_impurity(counts: &[usize], kind: Impurity) -> f64 {
    let n: usize = counts.iter().sum();
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    match kind {
        Impurity::Gini => 1.0 - p.iter().map(|q| q * q).sum::<f64>(),
        Impurity::Entropy => -p.iter().filter(|&&q| q > 0.0).map(|q| q * q.log2()).sum::<f64>(),
        Impurity::Misclassification => 1.0 - p.iter().cloned().fold(0.0, f64::max),
    }
}

/// Tries every (feature, midpoint) pair by direct counting.
fn oracle_split(ds: &Dataset, min_leaf: usize, kind: Impurity) -> Option<(usize, f64)> {
    let n = ds.n_rows();
    if n < 2 * min_leaf {
        return None;
    }
    let counts_of = |pred: &dyn Fn(usize) -> bool| {
        let mut c = vec![0; ds.n_classes()];
        (0..n).filter(|&i| pred(i)).for_each(|i| c[ds.label(i)] += 1);
        c
    };
    let parent = oracle_impurity(&counts_of(&|_| true), kind);
    if parent <= TIE {
        return None;
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..ds.n_features() {
        let mut values: Vec<f64> = (0..n).map(|i| ds.value(i, j)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let left = counts_of(&|i| ds.value(i, j) <= t);
            let right = counts_of(&|i| ds.value(i, j) > t);
            let (nl, nr) = (left.iter().sum::<usize>(), right.iter().sum::<usize>());
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let gain = parent
                - (nl as f64 * oracle_impurity(&left, kind) + nr as f64 * oracle_impurity(&right, kind)) / n as f64;
            if best.map_or(true, |(_, _, g)| gain > g + TIE) {
                best = Some((j, t, gain));
            }
        }
    }
    best.filter(|b| b.2 > TIE).map(|(j, t, _)| (j, t))
}

fn standardize_oracle(ds: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = ds.n_rows() as f64;
    let d = ds.n_features();
    let mut mean = vec![0.0; d];
    let mut scale = vec![1.0; d];
    for j in 0..d {
        let col: Vec<f64> = (0..ds.n_rows()).map(|i| ds.value(i, j)).collect();
        let m = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
        if sd > 0.0 && col.iter().any(|&v| v != col[0]) {
            mean[j] = m;
            scale[j] = sd;
        }
    }
    (mean, scale)
}

fn knn_oracle(ds: &Dataset, k: usize, x: &[f64]) -> usize {
    let counts = ds.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() == 1 {
        return counts.iter().position(|&c| c > 0).unwrap();
    }
    let (mean, scale) = standardize_oracle(ds);
    let z = |r: &[f64]| -> Vec<f64> { r.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s).collect() };
    let q = z(x);
    let mut dist: Vec<(f64, usize)> = (0..ds.n_rows())
        .map(|i| {
            let r = z(ds.row(i));
            (r.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = vec![0; ds.n_classes()];
    for &(_, i) in dist.iter().take(k.min(ds.n_rows())) {
        votes[ds.label(i)] += 1;
    }
    let top = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == top).unwrap()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / norm(a).max(norm(b)).max(1e-6)
}

fn central_difference(f: impl Fn(&[f64]) -> f64, w: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    let mut w = w.to_vec();
    (0..w.len())
        .map(|i| {
            let orig = w[i];
            w[i] = orig + h;
            let up = f(&w);
            w[i] = orig - h;
            let down = f(&w);
            w[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn runner(cases: u32, deterministic: bool) -> TestRunner {
    let config = ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    };
    if deterministic {
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
    } else {
        TestRunner::new(config)
    }
}

fn check<S>(
    cases: u32,
    deterministic: bool,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    runner(cases, deterministic)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub type Check = fn(bool) -> Result<(), String>;

/// Every randomized suite with a short name; the flag selects a fixed seed.
pub const ALL: [(&str, Check); 10] = [
    ("split vs brute force (200 cases)", split_matches_brute_force),
    ("knn vs brute force (100 cases)", knn_matches_brute_force),
    ("softmax gradient vs finite differences", softmax_gradient_matches_finite_differences),
    ("hinge subgradient vs finite differences", hinge_subgradient_matches_finite_differences),
    ("leaf normalization and partition", leaves_partition_the_training_rows),
    ("monotone transform invariance", monotone_transform_keeps_the_partition),
    ("knn rescaling invariance", knn_ignores_power_of_two_rescaling),
    ("homogeneous segments agree with tree", homogeneous_segments_agree_with_the_tree),
    ("determinism under fixed seed", fitting_is_deterministic_per_seed),
    ("model file round trip", model_file_round_trip),
];

pub fn split_matches_brute_force(det: bool) -> Result<(), String> {
    let s = (dataset_strategy(1..=12, 1..=3, 2..=3, 6), 1usize..=4, impurity_strategy());
    check(200, det, s, |(ds, min_leaf, kind)| {
        let params = TreeParams::new(min_leaf).with_impurity(kind);
        let rows: Vec<usize> = (0..ds.n_rows()).collect();
        let got = best_split(&ds, &rows, &params).map(|s| (s.feature, s.threshold));
        prop_assert_eq!(got, oracle_split(&ds, min_leaf, kind));
        Ok(())
    })
}

pub fn knn_matches_brute_force(det: bool) -> Result<(), String> {
    let s = (
        dataset_strategy(1..=30, 1..=4, 2..=3, 9),
        1usize..=7,
        prop::collection::vec(-2i32..=11, 4),
    );
    check(100, det, s, |(ds, k, probe)| {
        let c = fit_classifier(&ClassifierSpec::knn(k), &ds, 0).unwrap();
        let x: Vec<f64> = probe[..ds.n_features()].iter().map(|&v| f64::from(v)).collect();
        prop_assert_eq!(c.predict_row(&x).unwrap(), knn_oracle(&ds, k, &x));
        for i in 0..ds.n_rows() {
            prop_assert_eq!(c.predict_row(ds.row(i)).unwrap(), knn_oracle(&ds, k, ds.row(i)));
        }
        Ok(())
    })
}

pub fn softmax_gradient_matches_finite_differences(det: bool) -> Result<(), String> {
    let s = ((1usize..=8, 1usize..=4, 2usize..=4), any::<u64>(), 0.0f64..0.1);
    check(100, det, s, |((n, d, k), seed, l2)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let w: Vec<f64> = (0..k * (d + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = softmax_gradient(&w, k, &x, &y, l2);
        let numeric = central_difference(|w| softmax_loss(w, k, &x, &y, l2), &w);
        prop_assert!(rel_err(&analytic, &numeric) < 1e-4, "{:?} vs {:?}", analytic, numeric);
        Ok(())
    })
}

pub fn hinge_subgradient_matches_finite_differences(det: bool) -> Result<(), String> {
    let s = ((1usize..=8, 1usize..=4), any::<u64>(), 0.0f64..0.5);
    check(100, det, s, |((n, d), seed, lambda)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let w: Vec<f64> = (0..d + 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let near_kink = x.chunks_exact(d).zip(&y).any(|(r, t)| {
            let m: f64 = r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[d];
            (1.0 - t * m).abs() < 1e-3
        });
        prop_assume!(!near_kink);
        let analytic = hinge_subgradient(&w, &x, &y, lambda);
        let numeric = central_difference(|w| hinge_objective(w, &x, &y, lambda), &w);
        prop_assert!(rel_err(&analytic, &numeric) < 1e-4, "{:?} vs {:?}", analytic, numeric);
        Ok(())
    })
}

pub fn leaves_partition_the_training_rows(det: bool) -> Result<(), String> {
    let s = (dataset_strategy(1..=80, 1..=3, 2..=4, 12), 1usize..=6, impurity_strategy());
    check(64, det, s, |(ds, min_leaf, kind)| {
        let params = TreeParams::new(min_leaf).with_impurity(kind);
        let tree = DecisionTree::fit(&ds, &params).unwrap();
        let segs = tree.segments(&ds).unwrap();
        let mut counts = vec![vec![0usize; ds.n_classes()]; tree.segment_count()];
        for (i, &s) in segs.iter().enumerate() {
            counts[s][ds.label(i)] += 1;
        }
        prop_assert_eq!(tree.leaves().map(|l| l.size).sum::<usize>(), ds.n_rows());
        for (s, leaf) in tree.leaves().enumerate() {
            prop_assert_eq!(leaf.segment_id, s);
            prop_assert_eq!(&leaf.class_counts, &counts[s]);
            prop_assert!(leaf.size >= min_leaf.min(ds.n_rows()));
            prop_assert!((leaf.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let top = *leaf.class_counts.iter().max().unwrap();
            prop_assert_eq!(leaf.majority_label, leaf.class_counts.iter().position(|&c| c == top).unwrap());
        }
        Ok(())
    })
}

pub fn monotone_transform_keeps_the_partition(det: bool) -> Result<(), String> {
    let s = (dataset_strategy(2..=60, 1..=3, 2..=3, 12), 1usize..=5);
    check(64, det, s, |(ds, min_leaf)| {
        let params = TreeParams::new(min_leaf);
        let rows: Vec<Vec<f64>> = ds
            .rows()
            .map(|r| {
                let mut r = r.to_vec();
                r[0] = r[0].powi(3) + 2.0 * r[0] - 7.0;
                r
            })
            .collect();
        let warped = Dataset::from_rows(&rows, ds.labels(), ds.n_classes()).unwrap();
        let a = DecisionTree::fit(&ds, &params).unwrap().segments(&ds).unwrap();
        let b = DecisionTree::fit(&warped, &params).unwrap().segments(&warped).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn knn_ignores_power_of_two_rescaling(det: bool) -> Result<(), String> {
    let s = (dataset_strategy(2..=30, 1..=3, 2..=3, 9), -4i32..=4);
    check(64, det, s, |(ds, shift)| {
        let factor = 2f64.powi(shift);
        let rows: Vec<Vec<f64>> = ds.rows().map(|r| r.iter().map(|v| v * factor).collect()).collect();
        let scaled = Dataset::from_rows(&rows, ds.labels(), ds.n_classes()).unwrap();
        let a = fit_classifier(&ClassifierSpec::knn(3), &ds, 0).unwrap();
        let b = fit_classifier(&ClassifierSpec::knn(3), &scaled, 0).unwrap();
        prop_assert_eq!(a.predict(&ds).unwrap(), b.predict(&scaled).unwrap());
        Ok(())
    })
}

pub fn homogeneous_segments_agree_with_the_tree(det: bool) -> Result<(), String> {
    let s = (
        dataset_strategy(10..=80, 1..=3, 2..=3, 12),
        1usize..=8,
        0.6f64..=1.0,
        prop::collection::vec(prop::collection::vec(-1i32..=13, 3), 20),
    );
    check(24, det, s, |(ds, min_leaf, homogeneity, probes)| {
        let params = AugmentParams::new(TreeParams::new(min_leaf)).with_homogeneity(homogeneity);
        let m = AugmentedModel::fit(&ds, &params).unwrap();
        prop_assert_eq!(m.segments.len(), m.tree.segment_count());
        let d = ds.n_features();
        let probes = probes.iter().map(|p| p[..d].iter().map(|&v| f64::from(v)).collect::<Vec<_>>());
        for x in ds.rows().map(<[f64]>::to_vec).chain(probes) {
            let s = m.tree.segment_of(&x).unwrap();
            let seg = &m.segments[s];
            prop_assert_eq!(seg.homogeneous, seg.trained.is_none());
            if seg.homogeneous {
                prop_assert_eq!(m.predict_row(&x).unwrap(), m.tree.predict_row(&x).unwrap());
            }
        }
        Ok(())
    })
}

pub fn fitting_is_deterministic_per_seed(det: bool) -> Result<(), String> {
    let s = (dataset_strategy(10..=60, 1..=3, 2..=3, 12), any::<u64>());
    check(24, det, s, |(ds, seed)| {
        let params = AugmentParams::new(TreeParams::new(3)).with_seed(seed);
        prop_assert_eq!(AugmentedModel::fit(&ds, &params).unwrap(), AugmentedModel::fit(&ds, &params).unwrap());
        let et = ExtraTreesParams {
            n_trees: 5,
            min_leaf_size: 2,
            seed,
            ..Default::default()
        };
        prop_assert_eq!(fit_extra_trees(&ds, &et).unwrap(), fit_extra_trees(&ds, &et).unwrap());
        Ok(())
    })
}

const SCHEMA: &str = "\
size,numeric
colour,categorical
weight,numeric
kind,label
";

fn synthetic_csv(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colours = ["red", "green", "blue"];
    let mut out = String::from("size,colour,weight,kind\n");
    for _ in 0..n {
        let size: f64 = rng.random_range(0.0..10.0);
        let colour = colours[rng.random_range(0..3)];
        let weight: f64 = rng.random_range(-5.0..5.0);
        let kind = match (size > 5.0, colour, weight > 0.0) {
            (true, "red", _) => "alpha",
            (true, _, true) => "beta",
            (false, "blue", _) if rng.random::<f64>() < 0.7 => "beta",
            _ => "gamma",
        };
        out.push_str(&format!("{size},{colour},{weight},{kind}\n"));
    }
    out
}

pub fn trained_model_file(seed: u64, min_leaf: usize) -> ModelFile {
    let schema = Schema::parse(SCHEMA).unwrap();
    let (encoding, loaded) = Encoding::fit_reader(Cursor::new(synthetic_csv(300, seed)), &schema).unwrap();
    let params = AugmentParams::new(TreeParams::new(min_leaf)).with_seed(seed);
    let model = AugmentedModel::fit(&loaded.dataset, &params).unwrap();
    let acc = model.accuracy(&loaded.dataset).unwrap();
    let selected = (0..encoding.n_encoded()).collect();
    ModelFile::new(encoding, selected, model, TrainingInfo::now(300, 0, seed, acc)).unwrap()
}

pub fn model_file_round_trip(det: bool) -> Result<(), String> {
    check(12, det, (any::<u64>(), 3usize..=30), |(seed, min_leaf)| {
        let file = trained_model_file(seed, min_leaf);
        let back = ModelFile::from_json(&file.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &file);
        // Scoring input includes an unseen colour and no label column.
        let mut probe = String::from("weight,size,colour\n");
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for i in 0..200 {
            let colour = ["red", "green", "blue", "purple"][i % 4];
            probe.push_str(&format!("{},{},{colour}\n", rng.random_range(-6.0..6.0), rng.random_range(-1.0..11.0)));
        }
        let rows = file.encoding.load_features_reader(Cursor::new(&probe)).unwrap();
        prop_assert_eq!(rows.unknown_levels, 50);
        prop_assert_eq!(file.predict_rows(&rows).unwrap(), back.predict_rows(&rows).unwrap());
        Ok(())
    })
}
