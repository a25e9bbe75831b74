//! The leaf-level classifier pool and cross-validated selection.

mod knn;
pub mod logistic;
mod naive_bayes;
mod standardize;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cart::argmax_first;
use crate::data::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::par;
use crate::predict::{accuracy, Predict};
use crate::rng::derive_seed;

pub use knn::Knn;
pub use logistic::{Logistic, LogisticConfig};
pub use naive_bayes::{GaussianNb, VAR_SMOOTHING};
pub use standardize::Standardizer;
pub use svm::{LinearSvm, SvmConfig};

pub const DEFAULT_KNN_K: usize = 3;
pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
pub const DEFAULT_EPOCHS: usize = 200;
pub const DEFAULT_L2: f64 = 1e-4;
pub const DEFAULT_SVM_C: f64 = 1.0;
pub const MAX_BATCH: usize = 256;

/// A pool member: classifier kind plus its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Majority,
    Knn {
        k: usize,
    },
    Logistic {
        learning_rate: f64,
        epochs: usize,
        l2: f64,
    },
    GaussianNb,
    LinearSvm {
        c: f64,
        epochs: usize,
    },
}

impl ClassifierSpec {
    pub fn knn(k: usize) -> Self {
        ClassifierSpec::Knn { k }
    }

    pub fn logistic() -> Self {
        ClassifierSpec::Logistic {
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs: DEFAULT_EPOCHS,
            l2: DEFAULT_L2,
        }
    }

    pub fn linear_svm() -> Self {
        ClassifierSpec::LinearSvm {
            c: DEFAULT_SVM_C,
            epochs: DEFAULT_EPOCHS,
        }
    }

    /// Majority, knn(3), logistic, Gaussian naive Bayes, linear SVM.
    pub fn default_pool() -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::Majority,
            ClassifierSpec::knn(DEFAULT_KNN_K),
            ClassifierSpec::logistic(),
            ClassifierSpec::GaussianNb,
            ClassifierSpec::linear_svm(),
        ]
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ClassifierSpec::Majority => "majority",
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::Logistic { .. } => "logistic",
            ClassifierSpec::GaussianNb => "gaussian_nb",
            ClassifierSpec::LinearSvm { .. } => "linear_svm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{what} must be positive, got {v}")))
            }
        };
        match *self {
            ClassifierSpec::Knn { k: 0 } => Err(Error::param("knn needs k >= 1")),
            ClassifierSpec::Logistic {
                learning_rate,
                epochs,
                l2,
            } => {
                positive(learning_rate, "learning rate")?;
                positive(l2, "l2 strength")?;
                if epochs == 0 {
                    return Err(Error::param("epochs must be >= 1"));
                }
                Ok(())
            }
            ClassifierSpec::LinearSvm { c, epochs } => {
                positive(c, "C")?;
                if epochs == 0 {
                    return Err(Error::param("epochs must be >= 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::Majority | ClassifierSpec::GaussianNb => f.write_str(self.kind()),
            ClassifierSpec::Knn { k } => write!(f, "knn:k={k}"),
            ClassifierSpec::Logistic {
                learning_rate,
                epochs,
                l2,
            } => write!(f, "logistic:lr={learning_rate}:epochs={epochs}:l2={l2}"),
            ClassifierSpec::LinearSvm { c, epochs } => write!(f, "linear_svm:c={c}:epochs={epochs}"),
        }
    }
}

/// Parses `kind[:key=value]...`, e.g. `knn:3`, `knn:k=5`,
/// `logistic:lr=0.05:epochs=100:l2=0.001`, `linear_svm:c=0.5`.
impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let mut spec = match kind {
            "majority" => ClassifierSpec::Majority,
            "knn" => ClassifierSpec::knn(DEFAULT_KNN_K),
            "logistic" => ClassifierSpec::logistic(),
            "gaussian_nb" | "nb" => ClassifierSpec::GaussianNb,
            "linear_svm" | "svm" => ClassifierSpec::linear_svm(),
            other => return Err(Error::param(format!("unknown classifier `{other}`"))),
        };
        let bad = |opt: &str| Error::param(format!("bad option `{opt}` for {kind}"));
        for opt in parts {
            let (key, value) = opt.split_once('=').unwrap_or(("", opt));
            let num = || value.parse::<f64>().map_err(|_| bad(opt));
            let int = || value.parse::<usize>().map_err(|_| bad(opt));
            match (&mut spec, key) {
                (ClassifierSpec::Knn { k }, "" | "k") => *k = int()?,
                (ClassifierSpec::Logistic { learning_rate, .. }, "lr") => *learning_rate = num()?,
                (ClassifierSpec::Logistic { epochs, .. }, "epochs") => *epochs = int()?,
                (ClassifierSpec::Logistic { l2, .. }, "l2") => *l2 = num()?,
                (ClassifierSpec::LinearSvm { c, .. }, "c" | "C") => *c = num()?,
                (ClassifierSpec::LinearSvm { epochs, .. }, "epochs") => *epochs = int()?,
                _ => return Err(bad(opt)),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a comma-separated pool such as `majority,knn:3,logistic`.
pub fn parse_pool(s: &str) -> Result<Vec<ClassifierSpec>> {
    let pool: Vec<ClassifierSpec> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if pool.is_empty() {
        return Err(Error::param("empty classifier pool"));
    }
    Ok(pool)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum Model {
    Constant {
        label: usize,
    },
    Knn {
        standardizer: Standardizer,
        knn: Knn,
    },
    Logistic {
        standardizer: Standardizer,
        logistic: Logistic,
    },
    GaussianNb {
        nb: GaussianNb,
    },
    LinearSvm {
        standardizer: Standardizer,
        svm: LinearSvm,
    },
}

/// A fitted pool member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    spec: ClassifierSpec,
    n_features: usize,
    n_classes: usize,
    model: Model,
}

impl TrainedClassifier {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// The label returned for every input, when training saw a single class
    /// or the spec is `majority`.
    pub fn constant_label(&self) -> Option<usize> {
        match self.model {
            Model::Constant { label } => Some(label),
            _ => None,
        }
    }

    fn classify_unchecked(&self, x: &[f64]) -> usize {
        match &self.model {
            Model::Constant { label } => *label,
            Model::Knn { standardizer, knn } => knn.predict(&standardizer.transform_row(x)),
            Model::Logistic {
                standardizer,
                logistic,
            } => logistic.predict(&standardizer.transform_row(x)),
            Model::GaussianNb { nb } => nb.predict(x),
            Model::LinearSvm { standardizer, svm } => svm.predict(&standardizer.transform_row(x)),
        }
    }
}

impl Predict for TrainedClassifier {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_row(&self, x: &[f64]) -> Result<usize> {
        Error::check_dim(self.n_features, x.len())?;
        Ok(self.classify_unchecked(x))
    }
}

/// Trains one classifier on all rows of `ds`. Deterministic in (ds, spec, seed).
///
/// A training set with a single class yields a constant predictor for every kind.
pub fn fit_classifier(spec: &ClassifierSpec, ds: &Dataset, seed: u64) -> Result<TrainedClassifier> {
    spec.validate()?;
    if ds.is_empty() {
        return Err(Error::InvalidData("cannot train a classifier on an empty segment".into()));
    }
    let counts = ds.class_counts();
    let present = counts.iter().filter(|&&c| c > 0).count();
    let d = ds.n_features();
    let k = ds.n_classes();
    let batch = ds.n_rows().min(MAX_BATCH);
    let model = if present == 1 || matches!(spec, ClassifierSpec::Majority) {
        Model::Constant {
            label: argmax_first(&counts),
        }
    } else {
        match *spec {
            ClassifierSpec::Majority => unreachable!(),
            ClassifierSpec::Knn { k: neighbours } => {
                let standardizer = Standardizer::fit(ds);
                let rows = standardizer.transform(ds);
                Model::Knn {
                    knn: Knn::new(neighbours, d, k, rows, ds.labels().to_vec()),
                    standardizer,
                }
            }
            ClassifierSpec::Logistic {
                learning_rate,
                epochs,
                l2,
            } => {
                let standardizer = Standardizer::fit(ds);
                let z = standardizer.transform(ds);
                let cfg = LogisticConfig {
                    learning_rate,
                    epochs,
                    l2,
                    batch_size: batch,
                };
                Model::Logistic {
                    logistic: Logistic::fit(&z, ds.labels(), d, k, &cfg, seed),
                    standardizer,
                }
            }
            ClassifierSpec::GaussianNb => Model::GaussianNb {
                nb: GaussianNb::fit(ds),
            },
            ClassifierSpec::LinearSvm { c, epochs } => {
                let standardizer = Standardizer::fit(ds);
                let z = standardizer.transform(ds);
                let cfg = SvmConfig {
                    c,
                    epochs,
                    batch_size: batch,
                };
                Model::LinearSvm {
                    svm: LinearSvm::fit(&z, ds.labels(), d, k, &cfg, seed),
                    standardizer,
                }
            }
        }
    };
    Ok(TrainedClassifier {
        spec: *spec,
        n_features: d,
        n_classes: k,
        model,
    })
}

pub fn classify(c: &TrainedClassifier, x: &[f64]) -> Result<usize> {
    c.predict_row(x)
}

/// Mean held-out accuracy over the folds of `folds`.
pub fn cv_accuracy(spec: &ClassifierSpec, ds: &Dataset, folds: &FoldPlan, seed: u64) -> Result<f64> {
    if folds.len() != ds.n_rows() {
        return Err(Error::param(format!(
            "fold plan covers {} rows, dataset has {}",
            folds.len(),
            ds.n_rows()
        )));
    }
    let per_fold = par::map_range(folds.fold_count(), |f| -> Result<Option<f64>> {
        let (train, test) = folds.split(f);
        if test.is_empty() {
            return Ok(None);
        }
        if train.is_empty() {
            return Err(Error::param(format!("fold {f} leaves no training rows")));
        }
        let held_out = ds.subset(&test);
        let model = fit_classifier(spec, &ds.subset(&train), derive_seed(seed, f as u64))?;
        let predicted: Vec<usize> = held_out.rows().map(|x| model.classify_unchecked(x)).collect();
        Ok(Some(accuracy(&predicted, held_out.labels())))
    });
    let scores: Vec<f64> = per_fold
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    /// Position of the winner in the pool.
    pub index: usize,
    pub spec: ClassifierSpec,
    pub score: f64,
    /// CV accuracy of every pool member, in pool order.
    pub scores: Vec<f64>,
}

/// Picks the pool member with the highest CV accuracy; ties go to the
/// earlier pool entry.
pub fn select_best(
    ds: &Dataset,
    pool: &[ClassifierSpec],
    folds: &FoldPlan,
    seed: u64,
) -> Result<Selection> {
    if pool.is_empty() {
        return Err(Error::param("empty classifier pool"));
    }
    let scores = par::map_slice(pool, |spec| cv_accuracy(spec, ds, folds, seed))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(Selection {
        index: best,
        spec: pool[best],
        score: scores[best],
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_folds;

    fn xor(n_side: usize) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n_side {
            for j in 0..n_side {
                let x = i as f64 / (n_side - 1) as f64 * 2.0 - 1.0;
                let y = j as f64 / (n_side - 1) as f64 * 2.0 - 1.0;
                if x == 0.0 || y == 0.0 {
                    continue;
                }
                rows.push(vec![x, y]);
                labels.push(usize::from((x > 0.0) != (y > 0.0)));
            }
        }
        Dataset::from_rows(&rows, &labels, 2).unwrap()
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("knn:5".parse::<ClassifierSpec>().unwrap(), ClassifierSpec::knn(5));
        assert_eq!("knn:k=7".parse::<ClassifierSpec>().unwrap(), ClassifierSpec::knn(7));
        assert_eq!("knn".parse::<ClassifierSpec>().unwrap(), ClassifierSpec::knn(3));
        let lr: ClassifierSpec = "logistic:lr=0.5:epochs=10".parse().unwrap();
        assert_eq!(
            lr,
            ClassifierSpec::Logistic {
                learning_rate: 0.5,
                epochs: 10,
                l2: DEFAULT_L2
            }
        );
        assert!("knn:0".parse::<ClassifierSpec>().is_err());
        assert!("tree".parse::<ClassifierSpec>().is_err());
        assert!("logistic:lr=-1".parse::<ClassifierSpec>().is_err());
        assert!("majority:3".parse::<ClassifierSpec>().is_err());
        for spec in ClassifierSpec::default_pool() {
            assert_eq!(spec.to_string().parse::<ClassifierSpec>().unwrap(), spec);
        }
        assert_eq!(parse_pool("majority, knn:3").unwrap().len(), 2);
        assert!(parse_pool(" , ").is_err());
    }

    #[test]
    fn majority_is_constant() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], &[0, 0, 1], 2).unwrap();
        let c = fit_classifier(&ClassifierSpec::Majority, &ds, 0).unwrap();
        assert_eq!(c.constant_label(), Some(0));
        assert_eq!(c.predict(&ds).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn single_class_segments_are_constant_for_every_kind() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0]], &[1, 1], 3).unwrap();
        for spec in ClassifierSpec::default_pool() {
            let c = fit_classifier(&spec, &ds, 0).unwrap();
            assert_eq!(c.constant_label(), Some(1), "{spec}");
        }
    }

    #[test]
    fn knn_one_memorizes() {
        let ds = xor(8);
        let c = fit_classifier(&ClassifierSpec::knn(1), &ds, 0).unwrap();
        assert_eq!(c.accuracy(&ds).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let ds = xor(4);
        let c = fit_classifier(&ClassifierSpec::GaussianNb, &ds, 0).unwrap();
        assert!(matches!(
            c.predict_row(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_segment_is_an_error() {
        let ds = xor(4).subset(&[]);
        assert!(fit_classifier(&ClassifierSpec::Majority, &ds, 0).is_err());
    }

    #[test]
    fn cv_majority_near_base_rate() {
        let n = 1000;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i % 5 == 0)).collect();
        let ds = Dataset::from_rows(&rows, &labels, 2).unwrap();
        let folds = make_folds(n, 5, 1).unwrap();
        let acc = cv_accuracy(&ClassifierSpec::Majority, &ds, &folds, 0).unwrap();
        assert!((acc - 0.8).abs() <= 0.05, "{acc}");
    }

    #[test]
    fn cv_knn_on_duplicates_with_leave_one_out() {
        let base = xor(6);
        let idx: Vec<usize> = (0..base.n_rows()).flat_map(|i| [i, i]).collect();
        let ds = base.subset(&idx);
        let folds = make_folds(ds.n_rows(), ds.n_rows(), 2).unwrap();
        let acc = cv_accuracy(&ClassifierSpec::knn(1), &ds, &folds, 0).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn cv_rejects_mismatched_plan() {
        let ds = xor(4);
        let folds = make_folds(ds.n_rows() + 1, 2, 0).unwrap();
        assert!(cv_accuracy(&ClassifierSpec::Majority, &ds, &folds, 0).is_err());
    }

    #[test]
    fn selection_prefers_knn_on_xor_and_pool_order_on_ties() {
        let ds = xor(10);
        let folds = make_folds(ds.n_rows(), 5, 3).unwrap();
        let pool = [ClassifierSpec::Majority, ClassifierSpec::knn(3)];
        let sel = select_best(&ds, &pool, &folds, 0).unwrap();
        assert_eq!(sel.spec, ClassifierSpec::knn(3));
        assert!(sel.scores[1] > 0.9 && sel.scores[0] < 0.6, "{:?}", sel.scores);

        let pool = [ClassifierSpec::Majority, ClassifierSpec::Majority];
        let sel = select_best(&ds, &pool, &folds, 0).unwrap();
        assert_eq!(sel.scores[0], sel.scores[1]);
        assert_eq!(sel.index, 0);
        let only = select_best(&ds, &[ClassifierSpec::Majority], &folds, 0).unwrap();
        assert_eq!(only.spec, ClassifierSpec::Majority);
        assert!(select_best(&ds, &[], &folds, 0).is_err());
    }
}
