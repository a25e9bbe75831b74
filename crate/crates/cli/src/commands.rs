use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use augtree::augment::{evaluate, hoeffding_sample_size, segment_profiles, AugmentParams, AugmentedModel};
use augtree::classifiers::parse_pool;
use augtree::data::{split_indices, Dataset, Encoding, Loaded};
use augtree::experiment::leaf_size_sweep;
use augtree::featsel::{compare_feature_subset, fit_extra_trees, select_features, ExtraTreesParams, SelectionMode};
use augtree::model_file::{ModelFile, TrainingInfo};
use augtree::report::{write_atomic, write_importances, write_profiles, write_segment_report, write_summary, write_sweep};
use augtree::{ClassifierSpec, Error, Predict, Result, Schema, TreeParams};

use crate::{Command, ModelArgs};

/// 1 for bad arguments, 2 for everything that went wrong with the data.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) => 1,
        _ => 2,
    }
}

impl ModelArgs {
    fn params(&self) -> Result<AugmentParams> {
        let tree = TreeParams::new(self.min_leaf)
            .with_impurity(self.impurity)
            .with_max_depth(self.max_depth);
        let pool = match &self.pool {
            Some(p) => parse_pool(p)?,
            None => ClassifierSpec::default_pool(),
        };
        let params = AugmentParams::new(tree)
            .with_pool(pool)
            .with_cv_folds(self.cv_folds)
            .with_homogeneity(self.homogeneity)
            .with_seed(self.seed);
        params.validate()?;
        Ok(params)
    }
}

fn fit_encoding(data: &Path, schema: &Path) -> Result<(Encoding, Loaded)> {
    let schema = Schema::from_file(schema)?;
    let (encoding, loaded) = Encoding::fit(data, &schema)?;
    if loaded.dropped_rows > 0 {
        eprintln!("dropped {} rows with missing values", loaded.dropped_rows);
    }
    Ok((encoding, loaded))
}

fn read_feature_list(path: &Path, encoding: &Encoding) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let names: Vec<String> = encoding.encoded_features().iter().map(ToString::to_string).collect();
    let mut selected = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        match names.iter().position(|n| n == line) {
            Some(j) => selected.push(j),
            None => return Err(Error::InvalidData(format!("{}: unknown feature `{line}`", path.display()))),
        }
    }
    if selected.is_empty() {
        return Err(Error::InvalidData(format!("{}: no features listed", path.display())));
    }
    Ok(selected)
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_flush<W: Write>(w: &mut csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| io_error(Path::new("<output>"), e))
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Train {
            data,
            schema,
            out,
            features,
            model,
        } => train(&data, &schema, &out, features.as_deref(), &model),
        Command::Predict { model, data, out } => predict(&model, &data, &out),
        Command::Evaluate {
            model,
            data,
            out,
            summary,
            profiles,
            flag_threshold,
            min_flag_size,
        } => {
            let summary = summary.unwrap_or_else(|| summary_path(&out));
            evaluate_cmd(&model, &data, &out, &summary, profiles.as_deref(), flag_threshold, min_flag_size)
        }
        Command::Sweep {
            data,
            schema,
            out,
            leaf_sizes,
            test_fraction,
            model,
        } => sweep(&data, &schema, &out, &leaf_sizes, test_fraction, &model),
        Command::Featsel {
            data,
            schema,
            out,
            kept,
            n_trees,
            et_min_leaf,
            candidates,
            top_k,
            min_importance,
            min_leaf,
            test_fraction,
            seed,
        } => {
            let mode = match top_k {
                Some(k) => SelectionMode::TopK(k),
                None => SelectionMode::MinImportance(min_importance.unwrap_or(0.0)),
            };
            let params = ExtraTreesParams {
                n_trees,
                min_leaf_size: et_min_leaf,
                candidates_per_split: candidates,
                seed,
            };
            featsel(&data, &schema, &out, &kept, &params, mode, min_leaf, test_fraction)
        }
        Command::SampleSize { epsilon, delta } => {
            println!("n={}", hoeffding_sample_size(epsilon, delta)?);
            Ok(())
        }
        Command::Rules { model } => {
            print!("{}", ModelFile::load(model)?.model.tree.export_rules());
            Ok(())
        }
        Command::Split {
            data,
            train_out,
            test_out,
            test_fraction,
            seed,
        } => split(&data, &train_out, &test_out, test_fraction, seed),
    }
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn train(data: &Path, schema: &Path, out: &Path, features: Option<&Path>, args: &ModelArgs) -> Result<()> {
    let params = args.params()?;
    let (encoding, loaded) = fit_encoding(data, schema)?;
    let selected = match features {
        Some(path) => read_feature_list(path, &encoding)?,
        None => (0..encoding.n_encoded()).collect(),
    };
    let ds = loaded.dataset.select_features(&selected)?;
    let model = AugmentedModel::fit(&ds, &params)?;
    let train_accuracy = model.accuracy(&ds)?;
    let segments = model.segment_count();
    let info = TrainingInfo::now(ds.n_rows(), loaded.dropped_rows, params.seed, train_accuracy);
    ModelFile::new(encoding, selected, model, info)?.save(out)?;
    println!("rows={}", ds.n_rows());
    println!("segments={segments}");
    println!("train_accuracy={train_accuracy}");
    Ok(())
}

fn predict(model: &Path, data: &Path, out: &Path) -> Result<()> {
    let file = ModelFile::load(model)?;
    let rows = file.encoding.load_features(data)?;
    let predictions = file.predict_rows(&rows)?;
    write_atomic(out, |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["row_index", "segment_id", "predicted_label"])?;
        for (i, &(segment, label)) in predictions.iter().enumerate() {
            w.write_record([i.to_string().as_str(), segment.to_string().as_str(), file.class_name(label)])?;
        }
        csv_flush(&mut w)
    })?;
    println!("rows={}", predictions.len());
    println!("warnings={}", rows.unknown_levels);
    if rows.unknown_levels > 0 {
        eprintln!(
            "warning: {} categorical cells were missing or unseen and encoded as all zeros",
            rows.unknown_levels
        );
    }
    Ok(())
}

fn load_labeled(file: &ModelFile, data: &Path) -> Result<Dataset> {
    let loaded = file.encoding.load_labeled(data)?;
    if loaded.dropped_rows > 0 {
        eprintln!("dropped {} rows with missing values", loaded.dropped_rows);
    }
    if loaded.unknown_levels > 0 {
        eprintln!("warning: {} unseen categorical cells encoded as all zeros", loaded.unknown_levels);
    }
    file.project(&loaded.dataset)
}

fn evaluate_cmd(
    model: &Path,
    data: &Path,
    out: &Path,
    summary: &Path,
    profiles: Option<&Path>,
    flag_threshold: f64,
    min_flag_size: usize,
) -> Result<()> {
    if !(0.0..=1.0).contains(&flag_threshold) {
        return Err(Error::InvalidParameter(format!("flag threshold {flag_threshold} outside [0, 1]")));
    }
    let file = ModelFile::load(model)?;
    let ds = load_labeled(&file, data)?;
    let report = evaluate(&file.model, &ds, flag_threshold, min_flag_size)?;
    write_atomic(out, |w| write_segment_report(&report, w))?;
    write_atomic(summary, |w| write_summary(&report, w))?;
    if let Some(path) = profiles {
        let p = segment_profiles(&file.model, &ds)?;
        write_atomic(path, |w| write_profiles(&p, file.encoding.class_names(), w))?;
    }
    let o = &report.overall;
    println!("test_rows={}", o.test_rows);
    println!("tree_accuracy={}", o.tree_accuracy);
    println!("augmented_accuracy={}", o.augmented_accuracy);
    match o.filtered_accuracy {
        Some(a) => println!("filtered_accuracy={a}"),
        None => println!("filtered_accuracy="),
    }
    println!("flagged_fraction={}", o.flagged_fraction);
    println!("flagged_segments={}", o.flagged_segments);
    Ok(())
}

fn sweep(data: &Path, schema: &Path, out: &Path, sizes: &[usize], test_fraction: f64, args: &ModelArgs) -> Result<()> {
    let params = args.params()?;
    let (_, loaded) = fit_encoding(data, schema)?;
    let rows = leaf_size_sweep(&loaded.dataset, sizes, &params, test_fraction, args.seed)?;
    write_atomic(out, |w| write_sweep(&rows, w))?;
    let mut stdout = std::io::stdout().lock();
    write_sweep(&rows, &mut stdout)
}

#[allow(clippy::too_many_arguments)]
fn featsel(
    data: &Path,
    schema: &Path,
    out: &Path,
    kept: &Path,
    params: &ExtraTreesParams,
    mode: SelectionMode,
    min_leaf: usize,
    test_fraction: f64,
) -> Result<()> {
    let tree = TreeParams::new(min_leaf);
    tree.validate()?;
    let (_, loaded) = fit_encoding(data, schema)?;
    let ds = &loaded.dataset;
    let imp = fit_extra_trees(ds, params)?;
    let selected = select_features(&imp, mode)?;
    if selected.fell_back {
        eprintln!("warning: importance cut-off removed every feature; keeping the best one");
    }
    let cmp = compare_feature_subset(ds, &selected.indices, &tree, test_fraction, params.seed)?;
    let keep: Vec<usize> = if cmp.keep_subset {
        selected.indices.clone()
    } else {
        (0..ds.n_features()).collect()
    };
    write_atomic(out, |w| write_importances(&imp, w))?;
    write_atomic(kept, |w| {
        for &j in &keep {
            writeln!(w, "{}", ds.feature_names()[j]).map_err(|e| io_error(kept, e))?;
        }
        Ok(())
    })?;
    println!("selected={}", selected.indices.len());
    println!("all_features_accuracy={}", cmp.all_features_accuracy);
    println!("subset_accuracy={}", cmp.subset_accuracy);
    println!("kept={}", if cmp.keep_subset { "subset" } else { "all" });
    Ok(())
}

fn split(data: &Path, train_out: &Path, test_out: &Path, test_fraction: f64, seed: u64) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(data)?;
    let header = rdr.headers()?.clone();
    let records = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
    let (train, test) = split_indices(records.len(), test_fraction, seed)?;
    for (path, idx) in [(train_out, &train), (test_out, &test)] {
        write_atomic(path, |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(&header)?;
            for &i in idx {
                w.write_record(&records[i])?;
            }
            csv_flush(&mut w)
        })?;
    }
    println!("train_rows={}", train.len());
    println!("test_rows={}", test.len());
    Ok(())
}
