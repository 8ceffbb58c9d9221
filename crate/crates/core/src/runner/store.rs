//! Results persistence: an append-only JSON Lines store with one RunRecord
//! per line.

use std::io::Write as _;
use std::path::Path;

use crate::compare::metric_value;
use crate::error::{Error, Result};
use crate::evaluate::RunRecord;

/// Conjunctive read filters. An unset field matches everything; the metric
/// filter keeps only records that carry a value for that metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordFilter {
    pub config_hash: Option<String>,
    pub run_index: Option<usize>,
    pub fold_index: Option<usize>,
    pub metric: Option<String>,
}

impl RecordFilter {
    pub fn matches(&self, record: &RunRecord) -> bool {
        if let Some(hash) = &self.config_hash {
            if record.config_hash != *hash {
                return false;
            }
        }
        if let Some(run) = self.run_index {
            if record.run_index != run {
                return false;
            }
        }
        if let Some(fold) = self.fold_index {
            if record.fold_index != fold {
                return false;
            }
        }
        if let Some(metric) = &self.metric {
            if metric_value(record, metric).is_none() {
                return false;
            }
        }
        true
    }
}

/// Appends records to the store, one JSON line per record. Each line goes
/// out in a single write so a crash cannot leave a partial record followed
/// by a complete one.
pub fn write_records(records: &[RunRecord], store_path: &Path) -> Result<()> {
    if let Some(parent) = store_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(store_path)
        .map_err(|e| Error::io(store_path.display().to_string(), e))?;
    for record in records {
        let mut line = serde_json::to_string(record)
            .map_err(|e| Error::Store(format!("cannot serialize record: {}", e)))?;
        line.push('\n');
        file.write_all(line.as_bytes())
            .map_err(|e| Error::io(store_path.display().to_string(), e))?;
    }
    file.flush()
        .map_err(|e| Error::io(store_path.display().to_string(), e))?;
    Ok(())
}

/// Reads every record matching the filter, in file order.
pub fn read_records(store_path: &Path, filter: &RecordFilter) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(store_path)
        .map_err(|e| Error::io(store_path.display().to_string(), e))?;
    let mut records = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(line).map_err(|e| {
            Error::Store(format!(
                "{}: line {}: {}",
                store_path.display(),
                index + 1,
                e
            ))
        })?;
        if filter.matches(&record) {
            records.push(record);
        }
    }
    Ok(records)
}
