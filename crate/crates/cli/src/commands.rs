use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use riskexplain::backend::{build_backend, ResponseCache};
use riskexplain::contextualizer::assess_dataset;
use riskexplain::pipeline::{build_reports, select_records, top_k, RunOptions};
use riskexplain::report::{
    baseline_rows, coverage_tally, render_class_report, render_project_report, ClassReport,
    ReportFormat, ReportMode,
};
use riskexplain::{
    compose_prompt, compute_baseline, dataset_summary, load_dataset, validate_with,
    ClassRiskProfile, ProjectBaseline, ProjectDataset,
};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;

pub struct Ui {
    pub json: bool,
    pub quiet: bool,
}

impl Ui {
    fn progress(&self, message: &str) {
        if !self.quiet {
            eprintln!("{message}");
        }
    }
}

struct Loaded {
    dataset: ProjectDataset,
    baseline: ProjectBaseline,
    profiles: Vec<ClassRiskProfile>,
}

fn load(rc: &RunConfig, ui: &Ui) -> Result<Loaded, CliError> {
    let dataset = load_dataset(&rc.dataset_path, &rc.mapping, &rc.project_name, &rc.version)?;
    let missing = &dataset.load_report.missing;
    if !missing.is_empty() {
        let rows = dataset.load_report.affected_rows();
        let shown: Vec<String> = rows.iter().take(10).map(|r| (r + 1).to_string()).collect();
        let more = if rows.len() > 10 { ", ..." } else { "" };
        ui.progress(&format!(
            "warning: {} unreadable metric cell(s) treated as missing (data rows {}{more})",
            missing.len(),
            shown.join(", ")
        ));
    }
    let baseline = compute_baseline(&dataset, &dataset.metric_kinds())?;
    let profiles = assess_dataset(&dataset, &baseline, &rc.thresholds)?;
    Ok(Loaded {
        dataset,
        baseline,
        profiles,
    })
}

fn select(loaded: &Loaded, selector: &str) -> Result<Vec<usize>, CliError> {
    let rows = select_records(&loaded.dataset, selector);
    if rows.is_empty() {
        return Err(CliError::empty_selection(format!(
            "no class in {} matches `{selector}`",
            loaded.dataset.label()
        )));
    }
    Ok(rows)
}

fn stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn json_text(value: &serde_json::Value) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn stats(rc: &RunConfig, ui: &Ui) -> Result<(), CliError> {
    let loaded = load(rc, ui)?;
    let (ds, b) = (&loaded.dataset, &loaded.baseline);
    let summary = dataset_summary(ds);
    if ui.json {
        return stdout(&json_text(&json!({
            "project": ds.project_name,
            "version": ds.version,
            "summary": summary,
            "baseline": baseline_rows(b),
            "missing_cells": ds.load_report.missing.len(),
        }))?);
    }
    let mut out = String::new();
    let _ = writeln!(out, "{}: {}\n", ds.label(), summary.describe());
    let _ = writeln!(
        out,
        "{:<8} {:>18} {:>6} {:>10} {:>10}",
        "Metric", "μ, σ", "n", "min", "max"
    );
    for (kind, s) in &b.metrics {
        let _ = writeln!(
            out,
            "{:<8} {:>18} {:>6} {:>10} {:>10}",
            kind.acronym(),
            format!("{:.2}, {:.2}", s.mean, s.std_dev),
            s.count,
            riskexplain::metric::format_value(s.min),
            riskexplain::metric::format_value(s.max)
        );
    }
    stdout(&out)
}

pub fn prompt(rc: &RunConfig, selector: &str, ui: &Ui) -> Result<(), CliError> {
    let loaded = load(rc, ui)?;
    let rows = select(&loaded, selector)?;
    let mut bundles = Vec::new();
    for row in rows {
        bundles.push(compose_prompt(
            &loaded.dataset.records[row],
            &loaded.baseline,
            &rc.prompt,
        )?);
    }
    if ui.json {
        let value = match bundles.as_slice() {
            [one] => serde_json::to_value(one)?,
            many => serde_json::to_value(many)?,
        };
        return stdout(&json_text(&value)?);
    }
    let text = bundles
        .iter()
        .map(|b| format!("{}\n", b.rendered))
        .collect::<Vec<_>>()
        .join("\n---\n\n");
    stdout(&text)
}

fn open_cache(rc: &RunConfig) -> Result<Option<ResponseCache>, CliError> {
    rc.cache_dir
        .as_ref()
        .map(ResponseCache::open)
        .transpose()
        .map_err(CliError::from)
}

fn run_options(rc: &RunConfig) -> RunOptions {
    RunOptions {
        mode: rc.mode,
        prompt: rc.prompt.clone(),
        max_regenerations: rc.max_regenerations,
        cues: rc.cues.clone(),
    }
}

pub fn explain(rc: &RunConfig, selector: &str, show_prompt: bool, ui: &Ui) -> Result<(), CliError> {
    let loaded = load(rc, ui)?;
    let rows = select(&loaded, selector)?;
    let profiles: Vec<ClassRiskProfile> =
        rows.iter().map(|r| loaded.profiles[*r].clone()).collect();

    if show_prompt {
        for row in &rows {
            let bundle =
                compose_prompt(&loaded.dataset.records[*row], &loaded.baseline, &rc.prompt)?;
            let shown = format!(
                "--- prompt ---\n{}\n--- end prompt ---\n\n",
                bundle.rendered
            );
            if ui.json || rc.format == ReportFormat::Json {
                eprint!("{shown}");
            } else {
                stdout(&shown)?;
            }
        }
    }

    let backend = build_backend(&rc.backend)?;
    let cache = open_cache(rc)?;
    let reports = build_reports(
        &loaded.dataset,
        &loaded.baseline,
        &profiles,
        backend.as_ref(),
        cache.as_ref(),
        &run_options(rc),
        &|_| {},
    );

    let rendered = match rc.format {
        ReportFormat::Markdown => reports
            .iter()
            .map(|r| render_class_report(r, rc.mode, ReportFormat::Markdown))
            .collect::<Vec<_>>()
            .join("\n"),
        ReportFormat::Json if reports.len() == 1 => {
            render_class_report(&reports[0], rc.mode, ReportFormat::Json)
        }
        ReportFormat::Json => {
            let values = reports
                .iter()
                .map(|r| serde_json::from_str(&render_class_report(r, rc.mode, ReportFormat::Json)))
                .collect::<Result<Vec<serde_json::Value>, _>>()?;
            json_text(&serde_json::Value::Array(values))?
        }
    };
    match &rc.out_dir {
        Some(dir) => {
            let name = if reports.len() == 1 {
                format!(
                    "{}-{}",
                    slug(&loaded.dataset.label()),
                    slug(reports[0].profile.simple_name())
                )
            } else {
                format!("{}-selection", slug(&loaded.dataset.label()))
            };
            let path = write_report(dir, &name, rc.format, &rendered)?;
            ui.progress(&format!("wrote {}", path.display()));
        }
        None => stdout(&rendered)?,
    }
    report_failures(&reports, reports.len())
}

/// Exit 4 when no class got an explanation; individual failures are warnings.
fn report_failures(reports: &[ClassReport], attempted: usize) -> Result<(), CliError> {
    let failures: Vec<&ClassReport> = reports.iter().filter(|r| r.failure.is_some()).collect();
    for r in &failures {
        eprintln!(
            "warning: {}: {}",
            r.profile.class_name,
            r.failure.as_deref().unwrap_or_default()
        );
    }
    if attempted > 0 && failures.len() == attempted {
        return Err(CliError::backend(format!(
            "backend failed for all {attempted} class(es)"
        )));
    }
    Ok(())
}

pub fn batch(rc: &RunConfig, k: Option<usize>, ui: &Ui) -> Result<(), CliError> {
    let loaded = load(rc, ui)?;
    let profiles = match k {
        Some(k) => top_k(&loaded.profiles, k),
        None => loaded.profiles.clone(),
    };
    if profiles.is_empty() {
        return Err(CliError::empty_selection("no classes selected"));
    }

    let backend = build_backend(&rc.backend)?;
    let cache = open_cache(rc)?;
    let total = profiles.len();
    let done = AtomicUsize::new(0);
    let explained = rc.mode == ReportMode::Explained;
    let step = (total / 20).max(1);
    let on_done = |r: &ClassReport| {
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if explained && (n.is_multiple_of(step) || n == total || r.failure.is_some()) {
            ui.progress(&format!("[{n}/{total}] {}", r.profile.class_name));
        }
    };
    let reports = build_reports(
        &loaded.dataset,
        &loaded.baseline,
        &profiles,
        backend.as_ref(),
        cache.as_ref(),
        &run_options(rc),
        &on_done,
    );

    let (complete, with_coverage) = coverage_tally(&reports);
    if explained {
        ui.progress(&format!(
            "Taxonomy coverage: {complete}/{with_coverage} complete"
        ));
    }

    let stem = format!("{}-report", slug(&loaded.dataset.label()));
    match &rc.out_dir {
        Some(dir) => {
            let mut written = Vec::new();
            for format in [ReportFormat::Markdown, ReportFormat::Json] {
                let text = render_project_report(
                    &loaded.dataset,
                    &loaded.baseline,
                    &reports,
                    rc.mode,
                    format,
                );
                written.push(write_report(dir, &stem, format, &text)?);
            }
            for p in &written {
                ui.progress(&format!("wrote {}", p.display()));
            }
            if ui.json {
                stdout(&json_text(&json!({
                    "markdown": written[0],
                    "json": written[1],
                    "classes": reports.len(),
                    "coverage": {"complete": complete, "total": with_coverage},
                }))?)?;
            }
        }
        None => stdout(&render_project_report(
            &loaded.dataset,
            &loaded.baseline,
            &reports,
            rc.mode,
            rc.format,
        ))?,
    }
    if explained {
        report_failures(&reports, reports.len())?;
    }
    Ok(())
}

pub fn validate(rc: &RunConfig, selector: &str, text_path: &Path, ui: &Ui) -> Result<(), CliError> {
    let loaded = load(rc, ui)?;
    let rows = select(&loaded, selector)?;
    if rows.len() > 1 {
        return Err(CliError::input(format!(
            "`{selector}` matches {} classes; validate needs exactly one",
            rows.len()
        )));
    }
    let text = if text_path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(text_path)
            .map_err(|e| CliError::input(format!("reading {}: {e}", text_path.display())))?
    };
    if text.trim().is_empty() {
        return Err(CliError::input("explanation text is empty"));
    }
    let coverage = validate_with(&text, &loaded.profiles[rows[0]], &rc.cues);
    if ui.json {
        return stdout(&json_text(&serde_json::to_value(&coverage)?)?);
    }
    let mut out = format!(
        "{}: {}\n",
        loaded.profiles[rows[0]].class_name,
        coverage.describe()
    );
    for (name, spans) in [
        ("descriptive", &coverage.evidence.descriptive),
        ("contextual", &coverage.evidence.contextual),
        ("actionable", &coverage.evidence.actionable),
    ] {
        for s in spans {
            let _ = writeln!(
                out,
                "  {name} [{}..{}]: {}",
                s.start,
                s.end,
                s.excerpt.trim()
            );
        }
    }
    stdout(&out)
}

fn write_report(
    dir: &Path,
    stem: &str,
    format: ReportFormat,
    text: &str,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::input(format!("creating {}: {e}", dir.display())))?;
    let ext = match format {
        ReportFormat::Markdown => "md",
        ReportFormat::Json => "json",
    };
    let path = dir.join(format!("{stem}.{ext}"));
    std::fs::write(&path, text)
        .map_err(|e| CliError::input(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

/// `"Apache Camel 1.6"` -> `"apache-camel-1.6"`.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_alphanumeric() || c == '.' || c == '_' {
            out.extend(c.to_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}
