//! Class-level metric datasets loaded from CSV.
//!
//! The default column mapping targets the PROMISE defect-dataset layout
//! (`name`, `version`, `wmc`, `cbo`, `rfc`, `lcom`, ..., `bug`). PROMISE files
//! repeat the `name` header: the first column carries the project, a later
//! one the class. Mapped columns therefore resolve to the *last* header with
//! the given name.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::MetricKind;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("header row is missing mapped column `{column}`")]
    MissingColumn { column: String },
    #[error("dataset has no data rows")]
    Empty,
    #[error("row {row}: empty class name")]
    EmptyClassName { row: usize },
    #[error("row {row}: invalid bug count `{value}`")]
    InvalidBugCount { row: usize, value: String },
    #[error("invalid column mapping: {0}")]
    InvalidMapping(String),
}

/// Maps source CSV headers onto metric kinds, the class name and the bug count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub class_column: String,
    pub bug_column: String,
    /// Used to infer the dataset version when none is supplied.
    #[serde(default)]
    pub version_column: Option<String>,
    /// Ordered `(kind, source column)` pairs.
    pub metrics: Vec<(MetricKind, String)>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            class_column: "name".to_string(),
            bug_column: "bug".to_string(),
            version_column: Some("version".to_string()),
            metrics: MetricKind::CORE
                .iter()
                .map(|k| (k.clone(), k.id().to_string()))
                .collect(),
        }
    }
}

impl ColumnMapping {
    /// Mapping for files produced by [`write_canonical_csv`].
    pub fn canonical(kinds: &[MetricKind]) -> Self {
        ColumnMapping {
            class_column: "class_name".to_string(),
            bug_column: "bug".to_string(),
            version_column: None,
            metrics: kinds
                .iter()
                .map(|k| (k.clone(), k.id().to_string()))
                .collect(),
        }
    }

    /// Replace (or add) the source column for one metric.
    pub fn set_metric_column(&mut self, kind: MetricKind, column: impl Into<String>) {
        let column = column.into();
        match self.metrics.iter_mut().find(|(k, _)| *k == kind) {
            Some(entry) => entry.1 = column,
            None => self.metrics.push((kind, column)),
        }
    }

    pub fn metric_kinds(&self) -> Vec<MetricKind> {
        self.metrics.iter().map(|(k, _)| k.clone()).collect()
    }

    fn validate(&self) -> Result<(), DatasetError> {
        for kind in MetricKind::CORE {
            if !self.metrics.iter().any(|(k, _)| *k == kind) {
                return Err(DatasetError::InvalidMapping(format!(
                    "no column mapped for core metric {kind}"
                )));
            }
        }
        let mut seen = Vec::new();
        for (kind, _) in &self.metrics {
            if seen.contains(&kind) {
                return Err(DatasetError::InvalidMapping(format!(
                    "metric {kind} mapped twice"
                )));
            }
            seen.push(kind);
        }
        Ok(())
    }
}

/// One class: its metric values (`None` = missing) and documented bug count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub class_name: String,
    pub metrics: BTreeMap<MetricKind, Option<f64>>,
    pub bug_count: u64,
}

impl ClassRecord {
    pub fn new(class_name: impl Into<String>, bug_count: u64) -> Self {
        ClassRecord {
            class_name: class_name.into(),
            metrics: BTreeMap::new(),
            bug_count,
        }
    }

    pub fn with_metric(mut self, kind: MetricKind, value: f64) -> Self {
        self.metrics.insert(kind, Some(value));
        self
    }

    /// Value of `kind` if present and not missing.
    pub fn value(&self, kind: &MetricKind) -> Option<f64> {
        self.metrics.get(kind).copied().flatten()
    }

    /// Class name without a `.java` suffix or package prefix.
    pub fn simple_name(&self) -> &str {
        simple_class_name(&self.class_name)
    }
}

pub(crate) fn simple_class_name(name: &str) -> &str {
    let stem = name.strip_suffix(".java").unwrap_or(name);
    stem.rsplit(['.', '$']).next().unwrap_or(stem)
}

/// A cell that could not be parsed as a finite, non-negative number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingCell {
    /// Zero-based data row index (matches the record index).
    pub row: usize,
    pub metric: MetricKind,
    pub raw: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub missing: Vec<MissingCell>,
}

impl LoadReport {
    pub fn affected_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.missing.iter().map(|m| m.row).collect();
        rows.dedup();
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectDataset {
    pub project_name: String,
    pub version: String,
    pub records: Vec<ClassRecord>,
    pub column_mapping: ColumnMapping,
    pub load_report: LoadReport,
}

impl ProjectDataset {
    /// `"Apache Camel 1.6"`, or just the name when there is no version.
    pub fn label(&self) -> String {
        project_label(&self.project_name, &self.version)
    }

    pub fn metric_kinds(&self) -> Vec<MetricKind> {
        self.column_mapping.metric_kinds()
    }
}

pub(crate) fn project_label(name: &str, version: &str) -> String {
    if version.is_empty() {
        name.to_string()
    } else {
        format!("{name} {version}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub class_count: usize,
    pub buggy_count: usize,
    pub buggy_rate: f64,
}

impl DatasetSummary {
    /// `"965 classes, 188 (19.5%) with documented bugs"`.
    pub fn describe(&self) -> String {
        format!(
            "{} classes, {} ({:.1}%) with documented bugs",
            self.class_count,
            self.buggy_count,
            self.buggy_rate * 100.0
        )
    }
}

pub fn load_dataset(
    path: &Path,
    mapping: &ColumnMapping,
    project_name: &str,
    version: &str,
) -> Result<ProjectDataset, DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            DatasetError::NotFound(path.display().to_string())
        } else {
            DatasetError::Io {
                path: path.display().to_string(),
                source: e,
            }
        }
    })?;
    read_dataset(file, mapping, project_name, version)
}

/// Same as [`load_dataset`] over any reader.
pub fn read_dataset<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
    project_name: &str,
    version: &str,
) -> Result<ProjectDataset, DatasetError> {
    mapping.validate()?;
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers: Vec<String> = csv
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let h = if i == 0 {
                h.trim_start_matches('\u{feff}')
            } else {
                h
            };
            h.to_string()
        })
        .collect();
    let locate = |column: &str| -> Result<usize, DatasetError> {
        headers
            .iter()
            .rposition(|h| h == column)
            .ok_or_else(|| DatasetError::MissingColumn {
                column: column.to_string(),
            })
    };

    let class_idx = locate(&mapping.class_column)?;
    let bug_idx = locate(&mapping.bug_column)?;
    let metric_idx = mapping
        .metrics
        .iter()
        .map(|(kind, column)| Ok((kind.clone(), locate(column)?)))
        .collect::<Result<Vec<_>, DatasetError>>()?;
    let version_idx = mapping
        .version_column
        .as_deref()
        .and_then(|c| headers.iter().position(|h| h == c));

    let mut records = Vec::new();
    let mut report = LoadReport::default();
    let mut inferred_version = None;

    for (row, result) in csv.records().enumerate() {
        let fields = result?;
        let cell = |idx: usize| fields.get(idx).unwrap_or("");

        let class_name = cell(class_idx);
        if class_name.is_empty() {
            return Err(DatasetError::EmptyClassName { row });
        }
        let bug_count =
            parse_bug_count(cell(bug_idx)).ok_or_else(|| DatasetError::InvalidBugCount {
                row,
                value: cell(bug_idx).to_string(),
            })?;
        if inferred_version.is_none() {
            inferred_version = version_idx
                .map(cell)
                .filter(|v| !v.is_empty())
                .map(str::to_string);
        }

        let mut metrics = BTreeMap::new();
        for (kind, idx) in &metric_idx {
            let raw = cell(*idx);
            let value = parse_metric(raw);
            if value.is_none() {
                report.missing.push(MissingCell {
                    row,
                    metric: kind.clone(),
                    raw: raw.to_string(),
                });
            }
            metrics.insert(kind.clone(), value);
        }
        records.push(ClassRecord {
            class_name: class_name.to_string(),
            metrics,
            bug_count,
        });
    }

    if records.is_empty() {
        return Err(DatasetError::Empty);
    }

    let version = if version.is_empty() {
        inferred_version.unwrap_or_default()
    } else {
        version.to_string()
    };

    Ok(ProjectDataset {
        project_name: project_name.to_string(),
        version,
        records,
        column_mapping: mapping.clone(),
        load_report: report,
    })
}

fn parse_metric(raw: &str) -> Option<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() && *v >= 0.0)
}

fn parse_bug_count(raw: &str) -> Option<u64> {
    if let Ok(n) = raw.parse::<u64>() {
        return Some(n);
    }
    // Some exports write counts as floats ("2.0").
    let v = raw.parse::<f64>().ok()?;
    (v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64).then_some(v as u64)
}

pub fn dataset_summary(dataset: &ProjectDataset) -> DatasetSummary {
    let class_count = dataset.records.len();
    let buggy_count = dataset.records.iter().filter(|r| r.bug_count > 0).count();
    let buggy_rate = if class_count == 0 {
        0.0
    } else {
        buggy_count as f64 / class_count as f64
    };
    DatasetSummary {
        class_count,
        buggy_count,
        buggy_rate,
    }
}

/// Writes `class_name,<metric ids...>,bug`; missing values become empty cells.
pub fn write_canonical_csv<W: Write>(
    dataset: &ProjectDataset,
    writer: W,
) -> Result<(), DatasetError> {
    let kinds = dataset.metric_kinds();
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["class_name".to_string()];
    header.extend(kinds.iter().map(|k| k.id().to_string()));
    header.push("bug".to_string());
    out.write_record(&header)?;
    for record in &dataset.records {
        let mut row = vec![record.class_name.clone()];
        row.extend(
            kinds
                .iter()
                .map(|k| record.value(k).map(|v| v.to_string()).unwrap_or_default()),
        );
        row.push(record.bug_count.to_string());
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| DatasetError::Io {
        path: "<writer>".to_string(),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROMISE: &str = "\
name,version,name,wmc,dit,cbo,rfc,lcom,bug
ant,1.7,org.apache.tools.ant.Main,20,1,14,90,120,2
ant,1.7,org.apache.tools.ant.DispatchTask,4,2,3,5,4,0
ant,1.7,org.apache.tools.ant.Weird,n/a,1,-2,7,1,1
";

    fn load(text: &str) -> Result<ProjectDataset, DatasetError> {
        read_dataset(text.as_bytes(), &ColumnMapping::default(), "Apache Ant", "")
    }

    #[test]
    fn promise_layout_uses_last_name_column() {
        let ds = load(PROMISE).unwrap();
        assert_eq!(ds.records.len(), 3);
        assert_eq!(
            ds.records[1].class_name,
            "org.apache.tools.ant.DispatchTask"
        );
        assert_eq!(ds.records[1].simple_name(), "DispatchTask");
        assert_eq!(ds.records[0].value(&MetricKind::Rfc), Some(90.0));
        assert_eq!(ds.version, "1.7");
        assert_eq!(ds.label(), "Apache Ant 1.7");
    }

    #[test]
    fn dirty_cells_become_missing_and_are_reported() {
        let ds = load(PROMISE).unwrap();
        let weird = &ds.records[2];
        assert_eq!(weird.value(&MetricKind::Wmc), None);
        assert_eq!(weird.value(&MetricKind::Cbo), None);
        assert_eq!(weird.value(&MetricKind::Rfc), Some(7.0));
        assert_eq!(ds.load_report.missing.len(), 2);
        assert_eq!(ds.load_report.affected_rows(), vec![2]);
        let mut raws: Vec<_> = ds
            .load_report
            .missing
            .iter()
            .map(|m| m.raw.as_str())
            .collect();
        raws.sort();
        assert_eq!(raws, ["-2", "n/a"]);
    }

    #[test]
    fn header_only_is_empty_error() {
        let err = load("name,version,name,wmc,cbo,rfc,lcom,bug\n").unwrap_err();
        assert!(matches!(err, DatasetError::Empty));
    }

    #[test]
    fn missing_column_is_named() {
        let err = load("name,wmc,cbo,rfc,bug\nA,1,2,3,0\n").unwrap_err();
        match err {
            DatasetError::MissingColumn { column } => assert_eq!(column, "lcom"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_not_found() {
        let err = load_dataset(
            Path::new("/definitely/not/here.csv"),
            &ColumnMapping::default(),
            "x",
            "",
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::NotFound(_)));
        assert!(err.to_string().contains("file not found"));
    }

    #[test]
    fn bad_bug_count_is_an_error() {
        let err = load("name,wmc,cbo,rfc,lcom,bug\nA,1,2,3,4,yes\n").unwrap_err();
        assert!(matches!(err, DatasetError::InvalidBugCount { row: 0, .. }));
        let ok = load("name,wmc,cbo,rfc,lcom,bug\nA,1,2,3,4,2.0\n").unwrap();
        assert_eq!(ok.records[0].bug_count, 2);
    }

    #[test]
    fn duplicates_are_preserved() {
        let ds = load("name,wmc,cbo,rfc,lcom,bug\nA,1,2,3,4,0\nA,1,2,3,4,1\n").unwrap();
        assert_eq!(ds.records.len(), 2);
        assert_eq!(dataset_summary(&ds).buggy_count, 1);
    }

    #[test]
    fn summary_counts() {
        let ds = load(PROMISE).unwrap();
        let s = dataset_summary(&ds);
        assert_eq!(s.class_count, 3);
        assert_eq!(s.buggy_count, 2);
        assert_eq!(s.buggy_rate, 2.0 / 3.0);

        let clean = load("name,wmc,cbo,rfc,lcom,bug\nA,1,2,3,4,0\nB,1,2,3,4,0\n").unwrap();
        let s = dataset_summary(&clean);
        assert_eq!((s.buggy_count, s.buggy_rate), (0, 0.0));
        assert_eq!(
            DatasetSummary {
                class_count: 965,
                buggy_count: 188,
                buggy_rate: 188.0 / 965.0
            }
            .describe(),
            "965 classes, 188 (19.5%) with documented bugs"
        );
    }

    #[test]
    fn mapping_requires_core_metrics() {
        let mut mapping = ColumnMapping::default();
        mapping.metrics.retain(|(k, _)| *k != MetricKind::Lcom);
        let err = read_dataset(PROMISE.as_bytes(), &mapping, "x", "").unwrap_err();
        assert!(matches!(err, DatasetError::InvalidMapping(_)));
    }

    #[test]
    fn quoted_fields_and_bom() {
        let text = "\u{feff}name,wmc,cbo,rfc,lcom,bug\n\"a,b.C\",1,2,3,4,0\n";
        let ds = load(text).unwrap();
        assert_eq!(ds.records[0].class_name, "a,b.C");
    }
}
