//! Augmented decision trees for large tabular classification problems.
//!
//! A CART tree partitions the training data into segments; segments that
//! are not nearly pure get their own classifier, picked from a small pool by
//! cross-validation. The crate also provides per-segment evaluation with
//! flagging of hard segments, extremely randomized tree feature importance,
//! and a JSON model file.

pub mod augment;
pub mod cart;
pub mod classifiers;
pub mod data;
pub mod error;
pub mod experiment;
pub mod featsel;
pub mod model_file;
mod par;
pub mod predict;
pub mod report;
pub mod rng;

pub use augment::{
    empirical_risk, evaluate, fit_augmented, hoeffding_sample_size, predict_augmented, segment_profiles,
    AugmentParams, AugmentedModel, SegmentReport,
};
pub use cart::{DecisionTree, Impurity, TreeParams};
pub use classifiers::{ClassifierSpec, TrainedClassifier};
pub use data::{load_csv, Dataset, Encoding, Schema};
pub use error::{Error, Result};
pub use featsel::{fit_extra_trees, select_features, ExtraTreesParams, ImportanceVector, SelectionMode};
pub use model_file::ModelFile;
pub use par::is_parallel;
pub use predict::Predict;
