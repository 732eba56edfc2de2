//! Per-project metric baselines and standard-deviation distances.
//!
//! Standard deviations are population values (divide by `n`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{project_label, ProjectDataset};
use crate::metric::MetricKind;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("metric {0} has no non-missing values")]
    NoValues(MetricKind),
    #[error("metric {0} is not part of the dataset's column mapping")]
    UnknownMetric(MetricKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub std_dev: f64,
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl MetricStats {
    /// Statistics over `values`; `None` when empty.
    pub fn from_values(values: &[f64]) -> Option<MetricStats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = (values.iter().sum::<f64>() / n).clamp(min, max);
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(MetricStats {
            mean,
            std_dev: variance.sqrt(),
            count: values.len(),
            min,
            max,
        })
    }

    pub fn distance(&self, value: f64) -> SigmaDistance {
        sigma_distance(value, self.mean, self.std_dev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectBaseline {
    pub project_name: String,
    #[serde(default)]
    pub version: String,
    pub metrics: BTreeMap<MetricKind, MetricStats>,
}

impl ProjectBaseline {
    pub fn get(&self, kind: &MetricKind) -> Option<&MetricStats> {
        self.metrics.get(kind)
    }

    pub fn label(&self) -> String {
        project_label(&self.project_name, &self.version)
    }

    /// Builds a baseline directly from known `(kind, mean, std_dev)` figures.
    pub fn from_figures(
        project_name: &str,
        version: &str,
        figures: &[(MetricKind, f64, f64)],
    ) -> ProjectBaseline {
        let metrics = figures
            .iter()
            .map(|(kind, mean, std_dev)| {
                (
                    kind.clone(),
                    MetricStats {
                        mean: *mean,
                        std_dev: *std_dev,
                        count: 0,
                        min: *mean,
                        max: *mean,
                    },
                )
            })
            .collect();
        ProjectBaseline {
            project_name: project_name.to_string(),
            version: version.to_string(),
            metrics,
        }
    }
}

/// Signed distance from the project mean in units of standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaDistance {
    pub z: f64,
    /// False when the baseline has zero spread; `z` is then meaningless.
    pub defined: bool,
}

impl SigmaDistance {
    pub fn value(&self) -> Option<f64> {
        self.defined.then_some(self.z)
    }
}

pub fn sigma_distance(value: f64, mean: f64, std_dev: f64) -> SigmaDistance {
    if std_dev > 0.0 {
        SigmaDistance {
            z: (value - mean) / std_dev,
            defined: true,
        }
    } else {
        SigmaDistance {
            z: 0.0,
            defined: false,
        }
    }
}

pub fn compute_baseline(
    dataset: &ProjectDataset,
    metrics: &[MetricKind],
) -> Result<ProjectBaseline, BaselineError> {
    let known = dataset.metric_kinds();
    let mut out = BTreeMap::new();
    for kind in metrics {
        if !known.contains(kind) {
            return Err(BaselineError::UnknownMetric(kind.clone()));
        }
        let values: Vec<f64> = dataset
            .records
            .iter()
            .filter_map(|r| r.value(kind))
            .collect();
        let stats = MetricStats::from_values(&values)
            .ok_or_else(|| BaselineError::NoValues(kind.clone()))?;
        out.insert(kind.clone(), stats);
    }
    Ok(ProjectBaseline {
        project_name: dataset.project_name.clone(),
        version: dataset.version.clone(),
        metrics: out,
    })
}

/// One-decimal z with an explicit `+` for positive values; never `-0.0`.
pub fn format_signed_z(z: f64) -> String {
    let s = format!("{z:+.1}");
    match s.as_str() {
        "+0.0" | "-0.0" => "0.0".to_string(),
        _ => s,
    }
}
