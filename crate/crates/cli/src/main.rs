use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use augtree::augment::{DEFAULT_CV_FOLDS, DEFAULT_FLAG_THRESHOLD, DEFAULT_HOMOGENEITY, DEFAULT_MIN_FLAG_SIZE};
use augtree::Impurity;

/// Augmented decision trees: segment with CART, then fit a per-segment
/// classifier where the tree alone is not enough.
#[derive(Parser, Debug)]
#[command(name = "augtree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Minimum rows per tree leaf.
    #[arg(long, default_value_t = 100)]
    min_leaf: usize,
    /// Split criterion: gini, entropy or misclassification.
    #[arg(long, default_value_t = Impurity::Gini)]
    impurity: Impurity,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Comma-separated classifier pool, e.g. `majority,knn:3,logistic,gaussian_nb,linear_svm`.
    #[arg(long)]
    pool: Option<String>,
    #[arg(long, default_value_t = DEFAULT_CV_FOLDS)]
    cv_folds: usize,
    /// Leaf purity at or above which a segment keeps the tree label.
    #[arg(long, default_value_t = DEFAULT_HOMOGENEITY)]
    homogeneity: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit an augmented model and save it as JSON.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// File with one encoded feature name per line (as written by `featsel`).
        #[arg(long)]
        features: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Score a CSV; writes `row_index,segment_id,predicted_label`.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-segment accuracy report with flagging of hard segments.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Per-segment report CSV.
        #[arg(long)]
        out: PathBuf,
        /// Summary CSV; defaults to `<out stem>_summary.csv`.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Optional per-segment class-profile CSV over the evaluated rows.
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FLAG_THRESHOLD)]
        flag_threshold: f64,
        #[arg(long, default_value_t = DEFAULT_MIN_FLAG_SIZE)]
        min_flag_size: usize,
    },
    /// Train/test accuracy of tree and augmented model across leaf sizes.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated minimum leaf sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        leaf_sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.3)]
        test_fraction: f64,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Rank features with extremely randomized trees and pick a subset.
    Featsel {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Importance CSV (`feature_name,importance`).
        #[arg(long)]
        out: PathBuf,
        /// Kept feature list, usable with `train --features`.
        #[arg(long)]
        kept: PathBuf,
        #[arg(long, default_value_t = 100)]
        n_trees: usize,
        /// Minimum leaf size of the randomized trees.
        #[arg(long, default_value_t = 5)]
        et_min_leaf: usize,
        /// Features drawn per split (default: round(sqrt(d))).
        #[arg(long)]
        candidates: Option<usize>,
        #[arg(long, conflicts_with = "min_importance")]
        top_k: Option<usize>,
        /// Keep features with importance strictly above this value (default 0).
        #[arg(long)]
        min_importance: Option<f64>,
        /// Minimum leaf size of the tree used for the keep-or-revert check.
        #[arg(long, default_value_t = 100)]
        min_leaf: usize,
        #[arg(long, default_value_t = 0.3)]
        test_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rows needed for the empirical risk to be within epsilon with probability 1 - delta.
    SampleSize {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Print the tree as one rule per segment.
    Rules {
        #[arg(long)]
        model: PathBuf,
    },
    /// Split a CSV file into train and test files (header kept in both).
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        test_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
