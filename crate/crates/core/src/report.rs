//! Markdown and JSON rendering for class and project reports.
//!
//! `metrics_only` reports carry raw values and baseline statistics only;
//! `explained` reports add the generated explanation and its taxonomy
//! coverage. JSON keeps full numeric precision and sorted keys, so a
//! rendered document re-serializes to identical text.

use std::cmp::Ordering;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::backend::Explanation;
use crate::baseline::{format_signed_z, ProjectBaseline};
use crate::contextualizer::ClassRiskProfile;
use crate::dataset::{dataset_summary, ProjectDataset};
use crate::metric::format_value;
use crate::taxonomy::TaxonomyCoverage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    MetricsOnly,
    #[default]
    Explained,
}

impl ReportMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportMode::MetricsOnly => "metrics_only",
            ReportMode::Explained => "explained",
        }
    }
}

impl fmt::Display for ReportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "metrics_only" | "metrics" => Ok(ReportMode::MetricsOnly),
            "explained" => Ok(ReportMode::Explained),
            other => Err(format!(
                "unknown report mode `{other}` (expected metrics_only or explained)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!(
                "unknown report format `{other}` (expected markdown or json)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub project: String,
    pub profile: ClassRiskProfile,
    pub explanation: Option<Explanation>,
    pub coverage: Option<TaxonomyCoverage>,
    pub prompt_fingerprint: Option<String>,
    /// Backend failure for this class, when generation did not succeed.
    pub failure: Option<String>,
}

impl ClassReport {
    pub fn metrics_only(project: impl Into<String>, profile: ClassRiskProfile) -> Self {
        ClassReport {
            project: project.into(),
            profile,
            explanation: None,
            coverage: None,
            prompt_fingerprint: None,
            failure: None,
        }
    }
}

pub fn render_class_report(report: &ClassReport, mode: ReportMode, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => {
            let mut out = String::new();
            write_class_markdown(&mut out, report, mode, 1, None);
            out
        }
        ReportFormat::Json => to_json_text(&class_json(report, mode)),
    }
}

/// Report order: overall band (most severe first), then largest z, then
/// class name, then source row.
pub fn compare_profiles(a: &ClassRiskProfile, b: &ClassRiskProfile) -> Ordering {
    b.overall_band
        .sort_key()
        .cmp(&a.overall_band.sort_key())
        .then_with(|| {
            let za = a.max_z().unwrap_or(f64::NEG_INFINITY);
            let zb = b.max_z().unwrap_or(f64::NEG_INFINITY);
            zb.total_cmp(&za)
        })
        .then_with(|| a.class_name.cmp(&b.class_name))
        .then_with(|| a.row.cmp(&b.row))
}

pub fn sort_reports(reports: &mut [ClassReport]) {
    reports.sort_by(|a, b| compare_profiles(&a.profile, &b.profile));
}

pub fn render_project_report(
    dataset: &ProjectDataset,
    baseline: &ProjectBaseline,
    reports: &[ClassReport],
    mode: ReportMode,
    format: ReportFormat,
) -> String {
    let mut ordered = reports.to_vec();
    sort_reports(&mut ordered);
    match format {
        ReportFormat::Markdown => project_markdown(dataset, baseline, &ordered, mode),
        ReportFormat::Json => to_json_text(&project_json(dataset, baseline, &ordered, mode)),
    }
}

/// `(complete, total)` over reports that carry a coverage result.
pub fn coverage_tally(reports: &[ClassReport]) -> (usize, usize) {
    let with: Vec<_> = reports.iter().filter_map(|r| r.coverage.as_ref()).collect();
    (with.iter().filter(|c| c.complete).count(), reports.len())
}

fn to_json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values are serializable");
    s.push('\n');
    s
}

fn project_markdown(
    dataset: &ProjectDataset,
    baseline: &ProjectBaseline,
    reports: &[ClassReport],
    mode: ReportMode,
) -> String {
    let summary = dataset_summary(dataset);
    let mut out = String::new();
    let _ = writeln!(out, "# Risk report: {}\n", dataset.label());
    let _ = writeln!(out, "- Mode: {}", mode_label(mode));
    let _ = writeln!(out, "- {}", summary.describe());
    let _ = writeln!(out, "- Buggy rate: {:.3}", summary.buggy_rate);
    let _ = writeln!(out, "- Classes in this report: {}", reports.len());
    if mode == ReportMode::Explained {
        let (complete, total) = coverage_tally(reports);
        let _ = writeln!(out, "- Taxonomy coverage: {complete}/{total} complete");
    }
    out.push('\n');

    out.push_str("## Project Baseline\n\n");
    out.push_str("| Metric | μ | σ | n | min | max |\n|---|---|---|---|---|---|\n");
    for (kind, s) in &baseline.metrics {
        let _ = writeln!(
            out,
            "| {} | {:.2} | {:.2} | {} | {} | {} |",
            kind.acronym(),
            s.mean,
            s.std_dev,
            s.count,
            format_value(s.min),
            format_value(s.max)
        );
    }

    if !reports.is_empty() {
        out.push_str("\n## Classes\n");
        for (i, report) in reports.iter().enumerate() {
            out.push('\n');
            write_class_markdown(&mut out, report, mode, 3, Some(i + 1));
        }
    }
    out
}

fn mode_label(mode: ReportMode) -> &'static str {
    match mode {
        ReportMode::MetricsOnly => "metrics only",
        ReportMode::Explained => "explained",
    }
}

fn write_class_markdown(
    out: &mut String,
    report: &ClassReport,
    mode: ReportMode,
    level: usize,
    position: Option<usize>,
) {
    let p = &report.profile;
    let hashes = "#".repeat(level);
    match position {
        Some(n) => {
            let _ = writeln!(out, "{hashes} {n}. {}\n", p.class_name);
        }
        None => {
            let _ = writeln!(out, "{hashes} {} ({})\n", p.class_name, report.project);
        }
    }
    let bugs = match p.bug_rank {
        Some(rank) => format!("{} (rank {rank} in project)", p.bug_count),
        None => p.bug_count.to_string(),
    };
    let _ = writeln!(
        out,
        "Project: {} | Documented bugs: {bugs} | Overall band: {}\n",
        report.project, p.overall_band
    );
    out.push_str("| Metric | Value | μ | σ | z | Band |\n|---|---|---|---|---|---|\n");
    for a in &p.assessments {
        let z = a
            .distance
            .value()
            .map(format_signed_z)
            .unwrap_or_else(|| "n/a".into());
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} | {z} | {} |",
            a.metric.acronym(),
            format_value(a.value),
            a.mean,
            a.std_dev,
            a.band
        );
    }
    for kind in &p.unavailable {
        let _ = writeln!(out, "| {} | not available | | | | |", kind.acronym());
    }

    if mode != ReportMode::Explained {
        return;
    }
    out.push('\n');
    match (&report.explanation, &report.failure) {
        (Some(e), _) => {
            out.push_str(&demote_headings(e.text.trim_end(), level));
            out.push_str("\n\n");
            if let Some(c) = &report.coverage {
                let _ = writeln!(out, "_Taxonomy coverage: {}_", c.describe());
            }
            let fp: String = e.prompt_fingerprint.chars().take(12).collect();
            let _ = writeln!(out, "_Generated by {} for prompt {fp}_", e.backend_id);
        }
        (None, Some(failure)) => {
            let _ = writeln!(out, "_Explanation unavailable: {failure}_");
        }
        (None, None) => {
            let _ = writeln!(out, "_No explanation was generated._");
        }
    }
}

/// Pushes Markdown headings in generated text below `level`.
fn demote_headings(text: &str, level: usize) -> String {
    text.lines()
        .map(|line| {
            let depth = line.chars().take_while(|c| *c == '#').count();
            if depth > 0 && line[depth..].starts_with(' ') {
                format!("{}{}", "#".repeat((level + depth).min(6)), &line[depth..])
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn class_json(report: &ClassReport, mode: ReportMode) -> Value {
    let p = &report.profile;
    let metrics: Vec<Value> = p
        .assessments
        .iter()
        .map(|a| {
            let mut m = Map::new();
            m.insert("metric".into(), json!(a.metric));
            m.insert("value".into(), json!(a.value));
            m.insert("mean".into(), json!(a.mean));
            m.insert("std_dev".into(), json!(a.std_dev));
            m.insert("z".into(), json!(a.distance.value()));
            m.insert("band".into(), json!(a.band));
            if mode == ReportMode::Explained {
                m.insert("phrase".into(), json!(a.phrase));
            }
            Value::Object(m)
        })
        .collect();

    let mut obj = Map::new();
    obj.insert("class_name".into(), json!(p.class_name));
    obj.insert("project".into(), json!(report.project));
    obj.insert("row".into(), json!(p.row));
    obj.insert("bug_count".into(), json!(p.bug_count));
    obj.insert("bug_rank".into(), json!(p.bug_rank));
    obj.insert("overall_band".into(), json!(p.overall_band));
    obj.insert("metrics".into(), Value::Array(metrics));
    obj.insert("unavailable".into(), json!(p.unavailable));
    obj.insert("mode".into(), json!(mode));
    if mode == ReportMode::Explained {
        obj.insert("explanation".into(), json!(report.explanation));
        obj.insert("coverage".into(), json!(report.coverage));
        obj.insert(
            "prompt_fingerprint".into(),
            json!(report.prompt_fingerprint),
        );
        obj.insert("failure".into(), json!(report.failure));
    }
    Value::Object(obj)
}

/// Baseline rows `{project, metric, mean, std_dev, count, min, max}`.
pub fn baseline_rows(baseline: &ProjectBaseline) -> Value {
    Value::Array(
        baseline
            .metrics
            .iter()
            .map(|(kind, s)| {
                json!({
                    "project": baseline.label(),
                    "metric": kind,
                    "mean": s.mean,
                    "std_dev": s.std_dev,
                    "count": s.count,
                    "min": s.min,
                    "max": s.max,
                })
            })
            .collect(),
    )
}

fn project_json(
    dataset: &ProjectDataset,
    baseline: &ProjectBaseline,
    reports: &[ClassReport],
    mode: ReportMode,
) -> Value {
    let summary = dataset_summary(dataset);
    let mut obj = Map::new();
    obj.insert("project".into(), json!(dataset.project_name));
    obj.insert("version".into(), json!(dataset.version));
    obj.insert("mode".into(), json!(mode));
    obj.insert("summary".into(), json!(summary));
    obj.insert("baseline".into(), baseline_rows(baseline));
    obj.insert(
        "classes".into(),
        Value::Array(reports.iter().map(|r| class_json(r, mode)).collect()),
    );
    if mode == ReportMode::Explained {
        let (complete, total) = coverage_tally(reports);
        obj.insert(
            "coverage_summary".into(),
            json!({"complete": complete, "total": total}),
        );
    }
    Value::Object(obj)
}
