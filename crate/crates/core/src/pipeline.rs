//! End-to-end wiring: select classes, compose prompts, generate and
//! validate explanations (through the cache), and collect class reports.

use glob::Pattern;

use crate::backend::{
    parallel_map, BackendError, CacheEntry, Explanation, ExplanationBackend, GenerationRequest,
    ResponseCache,
};
use crate::baseline::ProjectBaseline;
use crate::contextualizer::ClassRiskProfile;
use crate::dataset::{ClassRecord, ProjectDataset};
use crate::prompt::{compose_prompt, PromptConfig};
use crate::report::{compare_profiles, ClassReport, ReportMode};
use crate::taxonomy::{validate_and_retry, validate_with, TaxonomyCoverage, TaxonomyCues};

/// Record indices matching `selector`.
///
/// Selectors containing `*`, `?` or `[` are globs, matched against both the
/// full and the simple class name. Otherwise an exact match on either name
/// wins; failing that, case-sensitive substring matches are returned.
pub fn select_records(dataset: &ProjectDataset, selector: &str) -> Vec<usize> {
    let names = |r: &ClassRecord| [r.class_name.clone(), r.simple_name().to_string()];
    if selector.contains(['*', '?', '[']) {
        let Ok(pattern) = Pattern::new(selector) else {
            return Vec::new();
        };
        return indices(dataset, |r| names(r).iter().any(|n| pattern.matches(n)));
    }
    let exact = indices(dataset, |r| names(r).iter().any(|n| n == selector));
    if !exact.is_empty() {
        return exact;
    }
    indices(dataset, |r| r.class_name.contains(selector))
}

fn indices(dataset: &ProjectDataset, keep: impl Fn(&ClassRecord) -> bool) -> Vec<usize> {
    dataset
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| keep(r))
        .map(|(i, _)| i)
        .collect()
}

/// The `k` most severe profiles in report order.
pub fn top_k(profiles: &[ClassRiskProfile], k: usize) -> Vec<ClassRiskProfile> {
    let mut sorted = profiles.to_vec();
    sorted.sort_by(compare_profiles);
    sorted.truncate(k);
    sorted
}

/// Cached generation + validation for one class. Deterministic backends skip
/// the cache; for others a hit avoids the backend entirely and a miss stores
/// the best attempt.
pub fn explain_with_cache(
    backend: &dyn ExplanationBackend,
    cache: Option<&ResponseCache>,
    request: &GenerationRequest<'_>,
    max_regenerations: u32,
    cues: &TaxonomyCues,
) -> Result<(Explanation, TaxonomyCoverage), BackendError> {
    let cache = cache.filter(|_| !backend.is_deterministic());
    let fingerprint = request.prompt.fingerprint();
    if let Some(entry) = cache.and_then(|c| c.get(&fingerprint, &backend.backend_id())) {
        let explanation = entry.into_explanation();
        let coverage = validate_with(&explanation.text, request.profile, cues);
        return Ok((explanation, coverage));
    }
    let (explanation, coverage) = validate_and_retry(backend, request, max_regenerations, cues)?;
    if let Some(c) = cache {
        c.put(&CacheEntry::from(&explanation))?;
    }
    Ok((explanation, coverage))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub mode: ReportMode,
    pub prompt: PromptConfig,
    pub max_regenerations: u32,
    pub cues: TaxonomyCues,
}

/// Builds one report per profile, in input order. Per-class failures are
/// recorded on the report rather than aborting the run. `on_done` is called
/// once per finished class (possibly from worker threads).
pub fn build_reports(
    dataset: &ProjectDataset,
    baseline: &ProjectBaseline,
    profiles: &[ClassRiskProfile],
    backend: &dyn ExplanationBackend,
    cache: Option<&ResponseCache>,
    options: &RunOptions,
    on_done: &(dyn Fn(&ClassReport) + Sync),
) -> Vec<ClassReport> {
    let project = dataset.label();
    let parallel = match options.mode {
        ReportMode::MetricsOnly => 1,
        ReportMode::Explained => backend.max_parallel(),
    };
    parallel_map(profiles, parallel, |_, profile| {
        let mut report = ClassReport::metrics_only(project.clone(), profile.clone());
        if options.mode == ReportMode::Explained {
            if let Err(failure) =
                explain_into(&mut report, dataset, baseline, backend, cache, options)
            {
                report.failure = Some(failure);
            }
        }
        on_done(&report);
        report
    })
}

fn explain_into(
    report: &mut ClassReport,
    dataset: &ProjectDataset,
    baseline: &ProjectBaseline,
    backend: &dyn ExplanationBackend,
    cache: Option<&ResponseCache>,
    options: &RunOptions,
) -> Result<(), String> {
    let profile = &report.profile;
    let record = profile
        .row
        .and_then(|row| dataset.records.get(row))
        .ok_or_else(|| format!("no source record for {}", profile.class_name))?;
    let prompt = compose_prompt(record, baseline, &options.prompt).map_err(|e| e.to_string())?;
    let request = GenerationRequest {
        prompt: &prompt,
        profile,
        baseline,
    };
    let (explanation, coverage) = explain_with_cache(
        backend,
        cache,
        &request,
        options.max_regenerations,
        &options.cues,
    )
    .map_err(|e| e.to_string())?;
    report.prompt_fingerprint = Some(prompt.fingerprint());
    report.explanation = Some(explanation);
    report.coverage = Some(coverage);
    Ok(())
}
