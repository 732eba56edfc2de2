//! Four-part explanation prompt.
//!
//! The parts are: project context (name plus baseline μ/σ), the class and
//! its raw metric values, the three required kinds of analysis, and the
//! output-format instruction. They are rendered in reading order, which
//! presents the class before the project context:
//!
//! ```text
//! Explain the following software metrics for class X.java to <audience>.
//! X.java class metrics: CBO=448, RFC=26, LCOM=325, WMC=26
//! Project Context: <project> codebase with baseline statistics -- CBO: μ=…, σ=…; …
//!
//! Required Analysis: (1) …, (2) …, (3) … Use clear, actionable language …
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baseline::ProjectBaseline;
use crate::dataset::ClassRecord;
use crate::metric::{format_value, MetricKind};

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("class {0} has none of the configured metrics; nothing to explain")]
    NothingToExplain(String),
    #[error("baseline has no statistics for metric {0}")]
    MissingBaselineMetric(MetricKind),
    #[error("metric {0} appears twice in metric_order")]
    DuplicateMetric(MetricKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptConfig {
    pub audience: String,
    /// Project phrase in the instruction sentence; defaults to
    /// `"<project name> project"`. Empty string drops it.
    pub project_label: Option<String>,
    pub include_baseline: bool,
    pub metric_order: Vec<MetricKind>,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig {
            audience: "a new contributor".to_string(),
            project_label: None,
            include_baseline: true,
            metric_order: MetricKind::CORE.to_vec(),
        }
    }
}

impl PromptConfig {
    pub fn validate(&self) -> Result<(), PromptError> {
        for (i, kind) in self.metric_order.iter().enumerate() {
            if self.metric_order[..i].contains(kind) {
                return Err(PromptError::DuplicateMetric(kind.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub component1_context: String,
    pub component2_metrics: String,
    pub component3_requirements: String,
    pub component4_format: String,
    pub rendered: String,
}

impl PromptBundle {
    pub fn fingerprint(&self) -> String {
        prompt_fingerprint(&self.rendered)
    }

    /// Components in the order they appear in `rendered`.
    pub fn presentation_order(&self) -> [&str; 4] {
        [
            &self.component2_metrics,
            &self.component1_context,
            &self.component3_requirements,
            &self.component4_format,
        ]
    }
}

/// Hex SHA-256 of the exact prompt text.
pub fn prompt_fingerprint(rendered: &str) -> String {
    hex::encode(Sha256::digest(rendered.as_bytes()))
}

const FORMAT_INSTRUCTION: &str =
    "Use clear, actionable language suitable for code review discussions.";

pub fn compose_prompt(
    record: &ClassRecord,
    baseline: &ProjectBaseline,
    config: &PromptConfig,
) -> Result<PromptBundle, PromptError> {
    config.validate()?;

    let present: Vec<(&MetricKind, f64)> = config
        .metric_order
        .iter()
        .filter_map(|k| record.value(k).map(|v| (k, v)))
        .collect();
    if present.is_empty() {
        return Err(PromptError::NothingToExplain(record.class_name.clone()));
    }

    let class = &record.class_name;
    let short = record.simple_name();

    let project_phrase = match &config.project_label {
        Some(label) => label.clone(),
        None => format!("{} project", baseline.project_name),
    };
    let audience = if project_phrase.is_empty() {
        config.audience.clone()
    } else {
        format!("{} to the {}", config.audience, project_phrase)
    };

    let values = present
        .iter()
        .map(|(k, v)| format!("{}={}", k.acronym(), format_value(*v)))
        .collect::<Vec<_>>()
        .join(", ");
    let component2_metrics = format!(
        "Explain the following software metrics for class {class} to {audience}.\n\
         {class} class metrics: {values}"
    );

    let component1_context = if config.include_baseline {
        let figures = present
            .iter()
            .map(|(k, _)| {
                let stats = baseline
                    .get(k)
                    .ok_or_else(|| PromptError::MissingBaselineMetric((*k).clone()))?;
                Ok(format!(
                    "{}: μ={:.2}, σ={:.2}",
                    k.acronym(),
                    stats.mean,
                    stats.std_dev
                ))
            })
            .collect::<Result<Vec<_>, PromptError>>()?
            .join("; ");
        format!(
            "Project Context: {} codebase with baseline statistics -- {figures}.",
            baseline.label()
        )
    } else {
        format!("Project Context: {} codebase.", baseline.label())
    };

    let component3_requirements = format!(
        "Required Analysis: (1) Clear definition of each metric and what it measures, \
         (2) Analysis of what the {short} class metrics indicate in this project context, \
         (3) Actionable improvement suggestions based on the project baselines and {short} class metrics."
    );
    let component4_format = FORMAT_INSTRUCTION.to_string();

    let rendered = format!(
        "{component2_metrics}\n{component1_context}\n\n{component3_requirements} {component4_format}"
    );

    Ok(PromptBundle {
        component1_context,
        component2_metrics,
        component3_requirements,
        component4_format,
        rendered,
    })
}
