//! CSV ingestion, schema handling, one-hot encoding, splits and folds.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

impl FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "numeric" => Ok(ColumnKind::Numeric),
            "categorical" => Ok(ColumnKind::Categorical),
            "label" => Ok(ColumnKind::Label),
            other => Err(Error::Schema(format!("unknown column kind `{other}`"))),
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Label => "label",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Column {
            name: name.into(),
            kind,
        }
    }
}

/// Ordered column descriptions. Exactly one column is the label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Column>", into = "Vec<Column>")]
pub struct Schema {
    columns: Vec<Column>,
    label: usize,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let mut label = None;
        for (i, c) in columns.iter().enumerate() {
            if c.name.is_empty() {
                return Err(Error::Schema(format!("column {i} has an empty name")));
            }
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name)));
            }
            if c.kind == ColumnKind::Label {
                if label.is_some() {
                    return Err(Error::Schema("more than one label column".into()));
                }
                label = Some(i);
            }
        }
        let label = label.ok_or_else(|| Error::Schema("no label column".into()))?;
        Ok(Schema { columns, label })
    }

    /// Parses the `name,kind` line format. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, kind) = line.rsplit_once(',').ok_or_else(|| {
                Error::Schema(format!("line {}: expected `name,kind`", lineno + 1))
            })?;
            columns.push(Column::new(name.trim(), kind.parse()?));
        }
        Schema::new(columns)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::parse(&text)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn label_index(&self) -> usize {
        self.label
    }

    pub fn label_name(&self) -> &str {
        &self.columns[self.label].name
    }
}

impl TryFrom<Vec<Column>> for Schema {
    type Error = Error;

    fn try_from(columns: Vec<Column>) -> Result<Self> {
        Schema::new(columns)
    }
}

impl From<Schema> for Vec<Column> {
    fn from(s: Schema) -> Self {
        s.columns
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.columns {
            writeln!(f, "{},{}", c.name, c.kind)?;
        }
        Ok(())
    }
}

/// One column of the encoded feature matrix: a numeric source column, or
/// the indicator for one level of a categorical source column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedFeature {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
}

impl EncodedFeature {
    pub fn numeric(source: impl Into<String>) -> Self {
        EncodedFeature {
            source: source.into(),
            level: None,
        }
    }

    pub fn indicator(source: impl Into<String>, level: impl Into<String>) -> Self {
        EncodedFeature {
            source: source.into(),
            level: Some(level.into()),
        }
    }

    pub fn is_indicator(&self) -> bool {
        self.level.is_some()
    }
}

impl fmt::Display for EncodedFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.level {
            Some(level) => write!(f, "{}={}", self.source, level),
            None => f.write_str(&self.source),
        }
    }
}

/// Dense row-major feature matrix with integer class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    n_features: usize,
    feature_names: Arc<[EncodedFeature]>,
    class_names: Arc<[String]>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        feature_names: Vec<EncodedFeature>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        Self::from_parts(features, labels, feature_names.into(), class_names.into())
    }

    /// Builds a dataset from rows, naming features `x0, x1, ...` and classes `0..n_classes`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * d);
        for row in rows {
            Error::check_dim(d, row.len())?;
            features.extend_from_slice(row);
        }
        let names = (0..d).map(|j| EncodedFeature::numeric(format!("x{j}"))).collect();
        let classes = (0..n_classes).map(|k| k.to_string()).collect();
        Dataset::new(features, labels.to_vec(), names, classes)
    }

    fn from_parts(
        features: Vec<f64>,
        labels: Vec<usize>,
        feature_names: Arc<[EncodedFeature]>,
        class_names: Arc<[String]>,
    ) -> Result<Self> {
        let n_features = feature_names.len();
        if features.len() != labels.len() * n_features {
            return Err(Error::InvalidData(format!(
                "{} feature values for {} rows of {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_names.len()) {
            return Err(Error::InvalidData(format!(
                "label {bad} outside 0..{}",
                class_names.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        Ok(Dataset {
            features,
            labels,
            n_features,
            feature_names,
            class_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.n_features + j]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[EncodedFeature] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows `indices`, in that order. Shares feature and class metadata.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            labels,
            n_features: self.n_features,
            feature_names: Arc::clone(&self.feature_names),
            class_names: Arc::clone(&self.class_names),
        }
    }

    /// Keeps only the encoded feature columns `columns`, in that order.
    pub fn select_features(&self, columns: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.n_features) {
            return Err(Error::param(format!(
                "feature index {bad} out of range (d = {})",
                self.n_features
            )));
        }
        let mut features = Vec::with_capacity(self.n_rows() * columns.len());
        for row in self.rows() {
            features.extend(columns.iter().map(|&j| row[j]));
        }
        let names: Vec<EncodedFeature> =
            columns.iter().map(|&j| self.feature_names[j].clone()).collect();
        Ok(Dataset {
            features,
            labels: self.labels.clone(),
            n_features: columns.len(),
            feature_names: names.into(),
            class_names: Arc::clone(&self.class_names),
        })
    }
}

/// The learned mapping from raw CSV records to encoded rows and label ids.
///
/// Categorical levels and labels are numbered in first-seen order over the
/// rows that survive missing-value filtering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EncodingRepr", into = "EncodingRepr")]
pub struct Encoding {
    schema: Schema,
    /// Levels per schema column; empty for numeric and label columns.
    levels: Vec<Vec<String>>,
    labels: Vec<String>,
    lookup: Lookup,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Lookup {
    levels: Vec<HashMap<String, usize>>,
    labels: HashMap<String, usize>,
}

impl Lookup {
    fn build(levels: &[Vec<String>], labels: &[String]) -> Self {
        let index = |items: &[String]| items.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Lookup {
            levels: levels.iter().map(|ls| index(ls)).collect(),
            labels: index(labels),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EncodingRepr {
    schema: Schema,
    levels: Vec<Vec<String>>,
    labels: Vec<String>,
}

impl TryFrom<EncodingRepr> for Encoding {
    type Error = Error;

    fn try_from(r: EncodingRepr) -> Result<Self> {
        if r.levels.len() != r.schema.columns().len() {
            return Err(Error::Model("level table does not match schema".into()));
        }
        let lookup = Lookup::build(&r.levels, &r.labels);
        if lookup.labels.len() != r.labels.len()
            || lookup.levels.iter().zip(&r.levels).any(|(m, l)| m.len() != l.len())
        {
            return Err(Error::Model("duplicate level or label names".into()));
        }
        Ok(Encoding {
            schema: r.schema,
            levels: r.levels,
            labels: r.labels,
            lookup,
        })
    }
}

impl From<Encoding> for EncodingRepr {
    fn from(e: Encoding) -> Self {
        EncodingRepr {
            schema: e.schema,
            levels: e.levels,
            labels: e.labels,
        }
    }
}

/// Result of reading a labelled CSV file.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub dataset: Dataset,
    /// Rows skipped because some field was missing.
    pub dropped_rows: usize,
    /// Cells holding a categorical level the encoding has not seen.
    pub unknown_levels: usize,
}

/// Encoded feature rows read for prediction; labels are not required.
#[derive(Clone, Debug)]
pub struct FeatureRows {
    pub values: Vec<f64>,
    pub n_rows: usize,
    pub n_features: usize,
    pub unknown_levels: usize,
}

impl FeatureRows {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }
}

fn is_missing(token: &str) -> bool {
    token.is_empty() || token == "?"
}

struct Header {
    /// For each schema column, its position in the CSV record (`None` only for
    /// an absent label column when labels are optional).
    positions: Vec<Option<usize>>,
}

impl Header {
    fn resolve(header: &csv::StringRecord, schema: &Schema, label_required: bool) -> Result<Self> {
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        let mut positions = Vec::with_capacity(schema.columns().len());
        for (i, col) in schema.columns().iter().enumerate() {
            let pos = names.iter().position(|&n| n == col.name);
            if pos.is_none() && (label_required || i != schema.label_index()) {
                return Err(Error::HeaderMismatch(format!("missing column `{}`", col.name)));
            }
            positions.push(pos);
        }
        if let Some(extra) = names
            .iter()
            .find(|n| !schema.columns().iter().any(|c| c.name == **n))
        {
            return Err(Error::HeaderMismatch(format!("unexpected column `{extra}`")));
        }
        if names.len() != positions.iter().flatten().count() {
            return Err(Error::HeaderMismatch("duplicate header names".into()));
        }
        Ok(Header { positions })
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn parse_number(token: &str, line: u64, column: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::ParseNumber {
            line,
            column: column.to_string(),
            token: token.to_string(),
        })
}

/// Loads a labelled CSV, learning the categorical and label encodings.
///
/// Rows with any missing field (empty or `?`) are dropped and counted.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Loaded> {
    load_csv_from_reader(open(path.as_ref())?, schema)
}

pub fn load_csv_from_reader<R: Read>(reader: R, schema: &Schema) -> Result<Loaded> {
    Encoding::fit_reader(reader, schema).map(|(_, loaded)| loaded)
}

impl Encoding {
    /// Reads a labelled CSV and returns both the learned encoding and the data.
    pub fn fit(path: impl AsRef<Path>, schema: &Schema) -> Result<(Encoding, Loaded)> {
        Self::fit_reader(open(path.as_ref())?, schema)
    }

    pub fn fit_reader<R: Read>(reader: R, schema: &Schema) -> Result<(Encoding, Loaded)> {
        let mut rdr = csv_reader(reader);
        let header = Header::resolve(rdr.headers()?, schema, true)?;
        let ncol = schema.columns().len();
        let mut enc = Encoding {
            schema: schema.clone(),
            levels: vec![Vec::new(); ncol],
            labels: Vec::new(),
            lookup: Lookup {
                levels: vec![HashMap::new(); ncol],
                labels: HashMap::new(),
            },
        };
        // Categorical cells hold the level index until one-hot expansion.
        let mut raw: Vec<f64> = Vec::new();
        let mut labels = Vec::new();
        let mut dropped = 0;
        let mut record = csv::StringRecord::new();
        while rdr.read_record(&mut record)? {
            let line = record.position().map_or(0, |p| p.line());
            if header
                .positions
                .iter()
                .any(|p| p.is_some_and(|p| is_missing(record.get(p).unwrap_or(""))))
            {
                dropped += 1;
                continue;
            }
            for (c, col) in schema.columns().iter().enumerate() {
                let token = &record[header.positions[c].expect("required column")];
                match col.kind {
                    ColumnKind::Numeric => raw.push(parse_number(token, line, &col.name)?),
                    ColumnKind::Categorical => {
                        let next = enc.levels[c].len();
                        let id = *enc.lookup.levels[c].entry(token.to_string()).or_insert(next);
                        if id == next {
                            enc.levels[c].push(token.to_string());
                        }
                        raw.push(id as f64);
                    }
                    ColumnKind::Label => {
                        let next = enc.labels.len();
                        let id = *enc.lookup.labels.entry(token.to_string()).or_insert(next);
                        if id == next {
                            enc.labels.push(token.to_string());
                        }
                        labels.push(id);
                    }
                }
            }
        }
        if labels.is_empty() {
            return Err(Error::NoRows { dropped });
        }
        let width = ncol - 1;
        let d = enc.n_encoded();
        let mut features = Vec::with_capacity(labels.len() * d);
        for raw_row in raw.chunks(width) {
            enc.expand(raw_row, &mut features);
        }
        let dataset = Dataset::new(features, labels, enc.encoded_features(), enc.labels.clone())?;
        let loaded = Loaded {
            dataset,
            dropped_rows: dropped,
            unknown_levels: 0,
        };
        Ok((enc, loaded))
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn class_names(&self) -> &[String] {
        &self.labels
    }

    pub fn levels(&self, column: usize) -> &[String] {
        &self.levels[column]
    }

    pub fn n_encoded(&self) -> usize {
        self.schema
            .columns()
            .iter()
            .enumerate()
            .map(|(c, col)| match col.kind {
                ColumnKind::Numeric => 1,
                ColumnKind::Categorical => self.levels[c].len(),
                ColumnKind::Label => 0,
            })
            .sum()
    }

    pub fn encoded_features(&self) -> Vec<EncodedFeature> {
        let mut out = Vec::with_capacity(self.n_encoded());
        for (c, col) in self.schema.columns().iter().enumerate() {
            match col.kind {
                ColumnKind::Numeric => out.push(EncodedFeature::numeric(&col.name)),
                ColumnKind::Categorical => out.extend(
                    self.levels[c]
                        .iter()
                        .map(|l| EncodedFeature::indicator(&col.name, l)),
                ),
                ColumnKind::Label => {}
            }
        }
        out
    }

    /// Expands one raw row (schema order without the label; categorical
    /// cells hold a level index, or a negative value for "unknown").
    fn expand(&self, raw_row: &[f64], out: &mut Vec<f64>) {
        let mut k = 0;
        for (c, col) in self.schema.columns().iter().enumerate() {
            match col.kind {
                ColumnKind::Numeric => {
                    out.push(raw_row[k]);
                    k += 1;
                }
                ColumnKind::Categorical => {
                    let start = out.len();
                    out.resize(start + self.levels[c].len(), 0.0);
                    let id = raw_row[k];
                    if id >= 0.0 {
                        out[start + id as usize] = 1.0;
                    }
                    k += 1;
                }
                ColumnKind::Label => {}
            }
        }
    }

    /// Reads a labelled CSV with this (fixed) encoding.
    ///
    /// Rows with missing fields are dropped; categorical levels not seen
    /// during fitting encode as an all-zero indicator block; labels not seen
    /// during fitting are an error.
    pub fn load_labeled(&self, path: impl AsRef<Path>) -> Result<Loaded> {
        self.load_labeled_reader(open(path.as_ref())?)
    }

    pub fn load_labeled_reader<R: Read>(&self, reader: R) -> Result<Loaded> {
        let mut rdr = csv_reader(reader);
        let header = Header::resolve(rdr.headers()?, &self.schema, true)?;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut raw = Vec::with_capacity(self.schema.columns().len());
        let mut dropped = 0;
        let mut unknown = 0;
        let mut record = csv::StringRecord::new();
        while rdr.read_record(&mut record)? {
            let line = record.position().map_or(0, |p| p.line());
            if header
                .positions
                .iter()
                .any(|p| p.is_some_and(|p| is_missing(record.get(p).unwrap_or(""))))
            {
                dropped += 1;
                continue;
            }
            raw.clear();
            unknown += self.encode_cells(&record, &header, line, &mut raw)?;
            let token = &record[header.positions[self.schema.label_index()].expect("label")];
            let y = self
                .label_id(token)
                .ok_or_else(|| Error::UnknownLabel {
                    line,
                    label: token.to_string(),
                })?;
            self.expand(&raw, &mut features);
            labels.push(y);
        }
        if labels.is_empty() {
            return Err(Error::NoRows { dropped });
        }
        let dataset = Dataset::new(features, labels, self.encoded_features(), self.labels.clone())?;
        Ok(Loaded {
            dataset,
            dropped_rows: dropped,
            unknown_levels: unknown,
        })
    }

    /// Reads feature rows for scoring. Every input row yields one output row:
    /// missing or unseen categorical values encode as all-zero indicators
    /// (counted in `unknown_levels`); a missing numeric value is an error.
    /// The label column may be absent.
    pub fn load_features(&self, path: impl AsRef<Path>) -> Result<FeatureRows> {
        self.load_features_reader(open(path.as_ref())?)
    }

    pub fn load_features_reader<R: Read>(&self, reader: R) -> Result<FeatureRows> {
        let mut rdr = csv_reader(reader);
        let header = Header::resolve(rdr.headers()?, &self.schema, false)?;
        let mut values = Vec::new();
        let mut raw = Vec::with_capacity(self.schema.columns().len());
        let mut n_rows = 0;
        let mut unknown = 0;
        let mut record = csv::StringRecord::new();
        while rdr.read_record(&mut record)? {
            let line = record.position().map_or(0, |p| p.line());
            raw.clear();
            unknown += self.encode_cells(&record, &header, line, &mut raw)?;
            self.expand(&raw, &mut values);
            n_rows += 1;
        }
        Ok(FeatureRows {
            values,
            n_rows,
            n_features: self.n_encoded(),
            unknown_levels: unknown,
        })
    }

    /// Encodes the non-label cells of a record into `raw`, returning the count
    /// of unknown or missing categorical cells.
    fn encode_cells(
        &self,
        record: &csv::StringRecord,
        header: &Header,
        line: u64,
        raw: &mut Vec<f64>,
    ) -> Result<usize> {
        let mut unknown = 0;
        for (c, col) in self.schema.columns().iter().enumerate() {
            let token = header.positions[c].and_then(|p| record.get(p)).unwrap_or("");
            match col.kind {
                ColumnKind::Numeric => {
                    if is_missing(token) {
                        return Err(Error::MissingNumeric {
                            line,
                            column: col.name.clone(),
                        });
                    }
                    raw.push(parse_number(token, line, &col.name)?);
                }
                ColumnKind::Categorical => match self.level_id(c, token) {
                    Some(id) => raw.push(id as f64),
                    None => {
                        unknown += 1;
                        raw.push(-1.0);
                    }
                },
                ColumnKind::Label => {}
            }
        }
        Ok(unknown)
    }

    fn level_id(&self, column: usize, token: &str) -> Option<usize> {
        self.lookup.levels[column].get(token).copied()
    }

    pub fn label_id(&self, token: &str) -> Option<usize> {
        self.lookup.labels.get(token).copied()
    }
}

/// Row indices of a train/test partition, each part in ascending order.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::param(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    if n < 2 {
        return Err(Error::param(format!("cannot split {n} rows")));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::param(format!(
            "test fraction {test_fraction} leaves an empty part for {n} rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(seed));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Splits `ds` into (train, test) with `round(n * test_fraction)` test rows.
pub fn train_test_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds.n_rows(), test_fraction, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Assignment of rows to cross-validation folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    fold_count: usize,
    assignments: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    pub fn fold_count(&self) -> usize {
        self.fold_count
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// (training rows, held-out rows) for fold `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != fold)
    }
}

/// Randomly assigns `n` rows to `k` folds whose sizes differ by at most one.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::param(format!("fold count {k} outside 2..={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(seed));
    let mut assignments = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        assignments[row] = pos % k;
    }
    Ok(FoldPlan {
        fold_count: k,
        assignments,
        seed,
    })
}
