//! Dataset loading, validation, and on-disk representation. The on-disk
//! format is comma-separated UTF-8 text with a mandatory header row, paired
//! with a JSON manifest that names the columns of interest.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_json, sha256_hex};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Declared kind of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// One feature column: its header name and how to interpret the values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

/// What to do when a cell holds the missing-value token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    DropRow,
    Error,
}

fn default_missing_token() -> String {
    "?".to_string()
}

/// Schema for a dataset file: which columns to read and how.
///
/// Columns present in the file but not named here are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub features: Vec<FeatureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default = "default_missing_token")]
    pub missing_token: String,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
}

impl Manifest {
    /// Parse a manifest from JSON text and check its internal invariants.
    pub fn from_json(text: &str) -> Result<Manifest> {
        let manifest: Manifest = serde_json::from_str(text)
            .map_err(|e| Error::Manifest(format!("invalid manifest JSON: {}", e)))?;
        manifest.check()?;
        Ok(manifest)
    }

    /// Read and parse a manifest file.
    pub fn from_file(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Manifest("manifest declares no features".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for spec in &self.features {
            if !seen.insert(spec.name.as_str()) {
                return Err(Error::Manifest(format!(
                    "duplicate feature name '{}'",
                    spec.name
                )));
            }
        }
        for (role, col) in [("label", &self.label), ("group", &self.group)] {
            if let Some(name) = col {
                if seen.contains(name.as_str()) {
                    return Err(Error::Manifest(format!(
                        "{} column '{}' is also declared as a feature",
                        role, name
                    )));
                }
            }
        }
        if self.missing_token.is_empty() {
            return Err(Error::Manifest("missing_token must be non-empty".into()));
        }
        Ok(())
    }

    /// Canonical JSON rendering, used for origin and configuration digests.
    pub fn canonical(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        canonical_json(&value)
    }
}

/// An immutable, fully validated in-memory dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// n rows by d feature columns; categorical features hold integer codes
    pub features: Matrix,
    /// class index per row, when a label column was declared
    pub labels: Option<Vec<usize>>,
    /// class names by index; empty when there are no labels
    pub class_names: Vec<String>,
    pub feature_meta: Vec<FeatureSpec>,
    /// source-sequence id per row, when a group column was declared
    pub group_ids: Option<Vec<usize>>,
    /// source path plus a digest of the file bytes and canonical manifest
    pub origin: String,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Rows per class, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        if let Some(labels) = &self.labels {
            for &l in labels {
                counts[l] += 1;
            }
        }
        counts
    }

    /// A new dataset holding the given rows, in the given order. Class names,
    /// feature metadata, and origin are carried over unchanged.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(rows),
            labels: self
                .labels
                .as_ref()
                .map(|ls| rows.iter().map(|&r| ls[r]).collect()),
            class_names: self.class_names.clone(),
            feature_meta: self.feature_meta.clone(),
            group_ids: self
                .group_ids
                .as_ref()
                .map(|gs| rows.iter().map(|&r| gs[r]).collect()),
            origin: self.origin.clone(),
        }
    }

    /// Structural equality ignoring origin, for comparing a dataset with its
    /// rewritten-and-reloaded counterpart.
    pub fn content_eq(&self, other: &Dataset) -> bool {
        self.features == other.features
            && self.labels == other.labels
            && self.class_names == other.class_names
            && self.feature_meta == other.feature_meta
            && self.group_ids == other.group_ids
    }
}

/// A loaded dataset together with non-fatal findings from the load.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

struct ColumnMap {
    feature_idx: Vec<usize>,
    label_idx: Option<usize>,
    group_idx: Option<usize>,
}

fn resolve_columns(header: &[&str], manifest: &Manifest) -> Result<ColumnMap> {
    let mut positions: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        positions.entry(name).or_default().push(i);
    }
    let lookup = |name: &str, role: &str| -> Result<usize> {
        match positions.get(name).map(|v| v.as_slice()) {
            Some([i]) => Ok(*i),
            Some(_) => Err(Error::Manifest(format!(
                "{} column '{}' appears more than once in the header",
                role, name
            ))),
            None => Err(Error::Manifest(format!(
                "{} column '{}' not found in the header",
                role, name
            ))),
        }
    };
    let feature_idx = manifest
        .features
        .iter()
        .map(|spec| lookup(&spec.name, "feature"))
        .collect::<Result<Vec<_>>>()?;
    let label_idx = manifest
        .label
        .as_deref()
        .map(|name| lookup(name, "label"))
        .transpose()?;
    let group_idx = manifest
        .group
        .as_deref()
        .map(|name| lookup(name, "group"))
        .transpose()?;
    Ok(ColumnMap {
        feature_idx,
        label_idx,
        group_idx,
    })
}

/// Interner assigning dense codes in first-appearance order.
#[derive(Default)]
struct CodeBook {
    codes: HashMap<String, usize>,
    names: Vec<String>,
}

impl CodeBook {
    fn intern(&mut self, value: &str) -> usize {
        if let Some(&code) = self.codes.get(value) {
            return code;
        }
        let code = self.names.len();
        self.codes.insert(value.to_string(), code);
        self.names.push(value.to_string());
        code
    }
}

/// Load a dataset file under the given manifest.
///
/// The header row is mandatory; fields are split on commas only; line
/// endings may be LF or CRLF. Label classes, categorical feature values, and
/// group ids are all coded in first-appearance order.
pub fn load_dataset(path: &Path, manifest: &Manifest) -> Result<LoadedDataset> {
    manifest.check()?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: "file is not valid UTF-8".into(),
    })?;

    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header_line = lines.next().ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        line: 1,
        message: "file is empty, expected a header row".into(),
    })?;
    let header: Vec<&str> = header_line.split(',').collect();
    let columns = resolve_columns(&header, manifest)?;

    let d = columns.feature_idx.len();
    let mut features = Matrix::zeros(0, d);
    let mut labels: Vec<usize> = Vec::new();
    let mut groups: Vec<usize> = Vec::new();
    let mut classes = CodeBook::default();
    let mut group_codes = CodeBook::default();
    let mut feature_codes: Vec<CodeBook> = manifest
        .features
        .iter()
        .map(|_| CodeBook::default())
        .collect();
    let mut warnings = Vec::new();
    let mut dropped = 0usize;

    let mut selected = columns.feature_idx.clone();
    selected.extend(columns.label_idx);
    selected.extend(columns.group_idx);

    let mut row_buf = vec![0.0; d];
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: line_no,
                message: format!(
                    "row has {} fields, header has {}",
                    fields.len(),
                    header.len()
                ),
            });
        }

        if let Some(&col) = selected.iter().find(|&&c| fields[c] == manifest.missing_token) {
            match manifest.missing_policy {
                MissingPolicy::DropRow => {
                    warnings.push(format!(
                        "line {}: dropped row with missing value in column '{}'",
                        line_no, header[col]
                    ));
                    dropped += 1;
                    continue;
                }
                MissingPolicy::Error => {
                    return Err(Error::Parse {
                        path: path.display().to_string(),
                        line: line_no,
                        message: format!("missing value in column '{}'", header[col]),
                    });
                }
            }
        }

        for (j, (&col, spec)) in columns
            .feature_idx
            .iter()
            .zip(&manifest.features)
            .enumerate()
        {
            let raw = fields[col];
            row_buf[j] = match spec.kind {
                FeatureKind::Numeric => {
                    let parsed: std::result::Result<f64, _> = raw.parse();
                    match parsed {
                        Ok(v) if v.is_finite() => v,
                        _ => {
                            return Err(Error::Parse {
                                path: path.display().to_string(),
                                line: line_no,
                                message: format!(
                                    "non-numeric value '{}' in numeric column '{}'",
                                    raw, spec.name
                                ),
                            });
                        }
                    }
                }
                FeatureKind::Categorical => feature_codes[j].intern(raw) as f64,
            };
        }
        features.push_row(&row_buf);
        if let Some(col) = columns.label_idx {
            labels.push(classes.intern(fields[col]));
        }
        if let Some(col) = columns.group_idx {
            groups.push(group_codes.intern(fields[col]));
        }
    }

    if features.n_rows() == 0 {
        let detail = if dropped > 0 {
            format!(" after dropping {} rows with missing values", dropped)
        } else {
            String::new()
        };
        return Err(Error::Dataset(format!("dataset is empty{}", detail)));
    }

    let digest = sha256_hex(&[&bytes, manifest.canonical().as_bytes()]);
    let dataset = Dataset {
        features,
        labels: columns.label_idx.map(|_| labels),
        class_names: classes.names,
        feature_meta: manifest.features.clone(),
        group_ids: columns.group_idx.map(|_| groups),
        origin: format!("{}#sha256:{}", path.display(), digest),
    };
    Ok(LoadedDataset { dataset, warnings })
}

/// Write a dataset back to comma-separated text under the same manifest it
/// was loaded with. Reloading the written file with that manifest recovers a
/// dataset with bitwise-equal content.
pub fn write_dataset(dataset: &Dataset, manifest: &Manifest, path: &Path) -> Result<()> {
    if manifest.features != dataset.feature_meta {
        return Err(Error::Manifest(
            "manifest features do not match the dataset's feature metadata".into(),
        ));
    }
    if manifest.label.is_some() != dataset.labels.is_some() {
        return Err(Error::Manifest(
            "manifest and dataset disagree about the label column".into(),
        ));
    }
    if manifest.group.is_some() != dataset.group_ids.is_some() {
        return Err(Error::Manifest(
            "manifest and dataset disagree about the group column".into(),
        ));
    }

    let mut out = String::new();
    let mut header: Vec<&str> = dataset.feature_meta.iter().map(|s| s.name.as_str()).collect();
    if let Some(label) = &manifest.label {
        header.push(label);
    }
    if let Some(group) = &manifest.group {
        header.push(group);
    }
    out.push_str(&header.join(","));
    out.push('\n');

    for i in 0..dataset.n_rows() {
        for (j, _) in dataset.feature_meta.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", dataset.features.get(i, j));
        }
        if let Some(labels) = &dataset.labels {
            let _ = write!(out, ",{}", dataset.class_names[labels[i]]);
        }
        if let Some(groups) = &dataset.group_ids {
            let _ = write!(out, ",{}", groups[i]);
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// One finding from [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: String,
    pub message: String,
    pub location: String,
}

/// Findings split by severity. An experiment may only start when `errors`
/// is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check a dataset for conditions that would undermine a cross-validated
/// experiment with `cv_folds` folds.
pub fn validate_dataset(dataset: &Dataset, cv_folds: usize) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (j, spec) in dataset.feature_meta.iter().enumerate() {
        let col = dataset.features.column(j);
        if col.iter().all(|&v| v == col[0]) {
            report.warnings.push(Finding {
                code: "constant_feature".into(),
                message: format!("feature '{}' has a single constant value", spec.name),
                location: spec.name.clone(),
            });
        }
    }

    let mut row_groups: HashMap<Vec<u64>, usize> = HashMap::new();
    for i in 0..dataset.n_rows() {
        let mut key: Vec<u64> = dataset
            .features
            .row(i)
            .iter()
            .map(|v| v.to_bits())
            .collect();
        if let Some(labels) = &dataset.labels {
            key.push(labels[i] as u64);
        }
        if let Some(groups) = &dataset.group_ids {
            key.push(groups[i] as u64);
        }
        *row_groups.entry(key).or_insert(0) += 1;
    }
    let duplicate_rows: usize = row_groups.values().filter(|&&c| c >= 2).sum();
    if duplicate_rows > 0 {
        report.warnings.push(Finding {
            code: "duplicate_rows".into(),
            message: format!("{} rows are duplicates of another row", duplicate_rows),
            location: "rows".into(),
        });
    }

    if dataset.labels.is_some() {
        for (class, &count) in dataset.class_counts().iter().enumerate() {
            if count < cv_folds {
                report.errors.push(Finding {
                    code: "class_too_small".into(),
                    message: format!(
                        "class '{}' has {} rows, smaller than fold count {}",
                        dataset.class_names[class], count, cv_folds
                    ),
                    location: dataset.class_names[class].clone(),
                });
            }
        }
    }

    if let Some(groups) = &dataset.group_ids {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for &g in groups {
            *counts.entry(g).or_insert(0) += 1;
        }
        for (g, count) in counts {
            if count < 1 {
                report.errors.push(Finding {
                    code: "empty_group".into(),
                    message: format!("group {} spans no rows", g),
                    location: format!("group {}", g),
                });
            }
        }
    }

    report
}
