//! The saved model: one self-describing JSON document holding the input
//! encoding, the selected feature columns, the augmented model, and some
//! training metadata.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::augment::AugmentedModel;
use crate::data::{Dataset, Encoding, FeatureRows};
use crate::error::{Error, Result};
use crate::predict::Predict;
use crate::report::write_atomic;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub rows: usize,
    pub dropped_rows: usize,
    pub seed: u64,
    pub train_accuracy: f64,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

impl TrainingInfo {
    pub fn now(rows: usize, dropped_rows: usize, seed: u64, train_accuracy: f64) -> Self {
        TrainingInfo {
            rows,
            dropped_rows,
            seed,
            train_accuracy,
            created_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub encoding: Encoding,
    /// Encoded columns fed to the model, in model order.
    pub selected_features: Vec<usize>,
    pub model: AugmentedModel,
    pub training: TrainingInfo,
}

impl ModelFile {
    pub fn new(
        encoding: Encoding,
        selected_features: Vec<usize>,
        model: AugmentedModel,
        training: TrainingInfo,
    ) -> Result<Self> {
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            encoding,
            selected_features,
            model,
            training,
        };
        file.check()?;
        Ok(file)
    }

    fn check(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let d = self.encoding.n_encoded();
        if let Some(&j) = self.selected_features.iter().find(|&&j| j >= d) {
            return Err(Error::Model(format!("selected feature {j} out of range (d = {d})")));
        }
        let m = &self.model;
        if m.n_features() != self.selected_features.len() {
            return Err(Error::Model(format!(
                "model expects {} features but {} are selected",
                m.n_features(),
                self.selected_features.len()
            )));
        }
        if m.tree.n_classes() != self.encoding.class_names().len() {
            return Err(Error::Model("class count differs between tree and encoding".into()));
        }
        if m.segments.len() != m.tree.segment_count() {
            return Err(Error::Model(format!(
                "{} segment models for {} segments",
                m.segments.len(),
                m.tree.segment_count()
            )));
        }
        for (s, seg) in m.segments.iter().enumerate() {
            if seg.segment_id != s {
                return Err(Error::Model(format!("segment {s} stored out of order")));
            }
            match &seg.trained {
                Some(c) if c.n_features() != m.n_features() || c.n_classes() != m.tree.n_classes() => {
                    return Err(Error::Model(format!("segment {s} classifier shape mismatch")));
                }
                None if !seg.homogeneous => {
                    return Err(Error::Model(format!("segment {s} has no classifier")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.check()?;
        Ok(file)
    }

    /// Writes the model atomically.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, |w| Ok(serde_json::to_writer_pretty(w, self)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_reader(BufReader::new(f))?;
        file.check()?;
        Ok(file)
    }

    /// Restricts a fully encoded dataset to the model's feature columns.
    pub fn project(&self, ds: &Dataset) -> Result<Dataset> {
        Error::check_dim(self.encoding.n_encoded(), ds.n_features())?;
        ds.select_features(&self.selected_features)
    }

    /// `(segment, label)` per encoded input row.
    pub fn predict_rows(&self, rows: &FeatureRows) -> Result<Vec<(usize, usize)>> {
        Error::check_dim(self.encoding.n_encoded(), rows.n_features)?;
        let sel = &self.selected_features;
        let mut values = Vec::with_capacity(rows.n_rows * sel.len());
        for i in 0..rows.n_rows {
            let row = rows.row(i);
            values.extend(sel.iter().map(|&j| row[j]));
        }
        self.model.predict_rows(&values, sel.len())
    }

    pub fn class_name(&self, label: usize) -> &str {
        &self.encoding.class_names()[label]
    }
}
