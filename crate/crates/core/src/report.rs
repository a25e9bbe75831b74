//! CSV writers for reports, sweeps and importances, and atomic file output.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::augment::{SegmentProfile, SegmentReport};
use crate::error::{Error, Result};
use crate::experiment::SweepRow;
use crate::featsel::ImportanceVector;

/// Writes `path` through a temporary file in the same directory that is
/// renamed into place once `write` succeeds.
pub fn write_atomic<F>(path: impl AsRef<Path>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !dir.exists() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        write(&mut out)?;
        out.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per segment:
/// `segment_id,test_size,tree_acc,aug_acc,flagged,profile_0,...,profile_{K-1}`.
/// Accuracies are empty for segments no test row reached.
pub fn write_segment_report(report: &SegmentReport, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = report.segments.first().map_or(0, |s| s.class_profile.len());
    let mut header = vec![
        "segment_id".to_string(),
        "test_size".into(),
        "tree_acc".into(),
        "aug_acc".into(),
        "flagged".into(),
    ];
    header.extend((0..k).map(|c| format!("profile_{c}")));
    w.write_record(&header)?;
    for s in &report.segments {
        let mut rec = vec![
            s.segment_id.to_string(),
            s.test_size.to_string(),
            opt(s.tree_accuracy),
            opt(s.augmented_accuracy),
            s.flagged.to_string(),
        ];
        rec.extend(s.class_profile.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<report>", e))
}

/// `metric,value` pairs for the overall figures of a report.
pub fn write_summary(report: &SegmentReport, out: &mut dyn Write) -> Result<()> {
    let o = &report.overall;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "value"])?;
    let rows = [
        ("test_rows", o.test_rows.to_string()),
        ("tree_accuracy", o.tree_accuracy.to_string()),
        ("augmented_accuracy", o.augmented_accuracy.to_string()),
        ("filtered_accuracy", opt(o.filtered_accuracy)),
        ("flagged_fraction", o.flagged_fraction.to_string()),
        ("flagged_segments", o.flagged_segments.to_string()),
        ("flag_threshold", o.flag_threshold.to_string()),
        ("min_flag_size", o.min_flag_size.to_string()),
    ];
    for (k, v) in rows {
        w.write_record([k, v.as_str()])?;
    }
    w.flush().map_err(|e| Error::io("<summary>", e))
}

pub fn write_sweep(rows: &[SweepRow], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["leaf_size", "tree_train_acc", "tree_test_acc", "aug_train_acc", "aug_test_acc"])?;
    for r in rows {
        w.write_record([
            r.leaf_size.to_string(),
            r.tree_train_acc.to_string(),
            r.tree_test_acc.to_string(),
            r.aug_train_acc.to_string(),
            r.aug_test_acc.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<sweep>", e))
}

/// `feature_name,importance`, most important first.
pub fn write_importances(imp: &ImportanceVector, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature_name", "importance"])?;
    for j in imp.ranking() {
        w.write_record([imp.names()[j].to_string(), imp.values()[j].to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<importances>", e))
}

/// `segment_id,size,<class name>...` with the class proportions of each segment.
pub fn write_profiles(profiles: &[SegmentProfile], class_names: &[String], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["segment_id".to_string(), "size".into()];
    header.extend(class_names.iter().cloned());
    w.write_record(&header)?;
    for p in profiles {
        let mut rec = vec![p.segment_id.to_string(), p.size.to_string()];
        rec.extend(p.proportions.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<profiles>", e))
}
