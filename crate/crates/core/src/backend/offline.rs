//! Rule-based explanation generator ("offline-v1").
//!
//! Output has three titled sections in a fixed order: metric descriptions,
//! contextual analysis (one phrase per assessed metric), and actionable
//! suggestions drawn from a (metric, band) rule table. Suggestions for
//! favorable and typical bands are preservation advice; elevated, high and
//! extreme escalate from "review before extending" to "refactor before
//! modifying".

use serde::Serialize;

use super::{BackendError, Explanation, ExplanationBackend, GenerationRequest};
use crate::baseline::ProjectBaseline;
use crate::contextualizer::{ClassRiskProfile, SeverityBand};
use crate::metric::MetricKind;
use crate::prompt::prompt_fingerprint;

pub const OFFLINE_BACKEND_ID: &str = "offline-v1";

pub const SECTION_DESCRIPTIONS: &str = "Metric Descriptions";
pub const SECTION_CONTEXT: &str = "Contextual Analysis";
pub const SECTION_ACTIONS: &str = "Actionable Suggestions";

#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineBackend;

impl ExplanationBackend for OfflineBackend {
    fn backend_id(&self) -> String {
        OFFLINE_BACKEND_ID.to_string()
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<Explanation, BackendError> {
        Ok(Explanation {
            text: offline_text(request.profile, request.baseline),
            backend_id: OFFLINE_BACKEND_ID.to_string(),
            prompt_fingerprint: request.prompt.fingerprint(),
            created_at: None,
            attempt_count: 1,
        })
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn max_parallel(&self) -> usize {
        std::thread::available_parallelism().map_or(4, |n| n.get())
    }
}

/// Generates an explanation without a prompt. The fingerprint covers the
/// generator's own inputs (profile and baseline).
pub fn offline_generate(profile: &ClassRiskProfile, baseline: &ProjectBaseline) -> Explanation {
    #[derive(Serialize)]
    struct Input<'a> {
        profile: &'a ClassRiskProfile,
        baseline: &'a ProjectBaseline,
    }
    let input = serde_json::to_string(&Input { profile, baseline }).unwrap_or_default();
    Explanation {
        text: offline_text(profile, baseline),
        backend_id: OFFLINE_BACKEND_ID.to_string(),
        prompt_fingerprint: prompt_fingerprint(&input),
        created_at: None,
        attempt_count: 1,
    }
}

pub fn offline_text(profile: &ClassRiskProfile, baseline: &ProjectBaseline) -> String {
    let short = profile.simple_name();
    let project = baseline.label();
    let mut out = String::new();

    out.push_str(&format!("## {SECTION_DESCRIPTIONS}\n\n"));
    for a in &profile.assessments {
        out.push_str(&format!(
            "- {} ({}): {}\n",
            a.metric.acronym(),
            a.metric.display_name(),
            a.metric.definition()
        ));
    }

    out.push_str(&format!("\n## {SECTION_CONTEXT}\n\n"));
    for a in &profile.assessments {
        out.push_str("- ");
        out.push_str(&a.phrase);
        if let Some(note) = interpretation(&a.metric, a.band, short) {
            out.push_str(" Interpretation: ");
            out.push_str(&note);
        }
        out.push('\n');
    }
    for kind in &profile.unavailable {
        out.push_str(&format!(
            "- {} is not available for this class in the source data.\n",
            kind.acronym()
        ));
    }
    out.push('\n');
    out.push_str(&verdict(profile.overall_band, short, &project));
    out.push('\n');
    out.push_str(&bug_history(profile));
    out.push('\n');

    out.push_str(&format!("\n## {SECTION_ACTIONS}\n\n"));
    let mut ordered: Vec<_> = profile.assessments.iter().collect();
    // Highest band first: that is where the work should start.
    ordered.sort_by_key(|a| std::cmp::Reverse(a.band.sort_key()));
    for a in ordered {
        out.push_str(&format!("- {}\n", suggestion(&a.metric, a.band, short)));
    }
    out
}

fn verdict(band: SeverityBand, short: &str, project: &str) -> String {
    match band {
        SeverityBand::Extreme | SeverityBand::High => format!(
            "Within {project}, {short} is a hotspot: changes to it carry more risk than \
             changes to a typical class."
        ),
        SeverityBand::Elevated => {
            format!("Within {project}, {short} sits above the project norm on at least one metric.")
        }
        SeverityBand::Typical | SeverityBand::Favorable => {
            format!("Within {project}, this profile matches a stable class that is not a hotspot.")
        }
        SeverityBand::NoVariance => format!(
            "Within {project}, none of these metrics vary across classes, so {short} \
             cannot be ranked against its peers."
        ),
    }
}

fn bug_history(profile: &ClassRiskProfile) -> String {
    match (profile.bug_count, profile.bug_rank) {
        (0, _) => "Bug history: no documented bugs.".to_string(),
        (n, Some(1)) => format!("Bug history: {n} documented bug(s), the most in the project."),
        (n, Some(rank)) => {
            format!("Bug history: {n} documented bug(s), rank {rank} in the project.")
        }
        (n, None) => format!("Bug history: {n} documented bug(s)."),
    }
}

fn interpretation(metric: &MetricKind, band: SeverityBand, short: &str) -> Option<String> {
    if !matches!(band, SeverityBand::High | SeverityBand::Extreme) {
        return None;
    }
    Some(match metric {
        MetricKind::Cbo => format!(
            "{short} depends on far more types than is usual here; a change to it, or to \
             any of those types, can break code well beyond this class."
        ),
        MetricKind::Rfc => format!(
            "a call into {short} can reach an unusually large set of methods, so the \
             effects of a change are hard to predict."
        ),
        MetricKind::Lcom => format!(
            "the methods of {short} touch largely separate state, a sign that it bundles \
             several responsibilities."
        ),
        MetricKind::Wmc => format!(
            "{short} carries much more method complexity than its peers, which makes it \
             harder to read and to test thoroughly."
        ),
        MetricKind::Other(_) => format!("{short} is well outside the project norm on this column."),
    })
}

/// The (metric, band) rule table.
fn suggestion(metric: &MetricKind, band: SeverityBand, short: &str) -> String {
    use SeverityBand::*;
    match (metric, band) {
        (MetricKind::Cbo, Favorable) => {
            "Preserve low coupling: avoid adding new concrete dependencies; prefer small interfaces.".into()
        }
        (MetricKind::Cbo, Typical) => {
            "Keep coupling at the project norm: prefer existing interfaces over new concrete dependencies.".into()
        }
        (MetricKind::Cbo, Elevated) => "Review before extending: avoid new dependencies in this change \
             and prefer injecting collaborators through interfaces."
            .into(),
        (MetricKind::Cbo, High) => format!(
            "Refactor before modifying: extract the dependencies this change touches behind one or two \
             interfaces, and add tests around the code in {short} that uses them."
        ),
        (MetricKind::Cbo, Extreme) => format!(
            "Do not add new dependencies to {short} unless there is no alternative. Hide its \
             collaborators behind a small number of facade interfaces instead of referencing many \
             concrete classes, and add tests for affected dependents before changing it."
        ),
        (MetricKind::Cbo, NoVariance) => {
            "Coupling is uniform across the project: avoid being the first class to add extra dependencies.".into()
        }

        (MetricKind::Rfc, Favorable) => {
            "Keep the surface small: avoid new public methods; prefer collaborators for new behavior.".into()
        }
        (MetricKind::Rfc, Typical) => "Keep the response set in line with the project: prefer delegating \
             new behavior to collaborators over adding public methods."
            .into(),
        (MetricKind::Rfc, Elevated) => "Review before extending: avoid widening the public API, and add \
             tests for each method you touch."
            .into(),
        (MetricKind::Rfc, High) => format!(
            "Refactor before modifying: split {short} so each part calls fewer methods, and add tests \
             that pin the existing behavior first."
        ),
        (MetricKind::Rfc, Extreme) => format!(
            "Do not widen the behavioral surface of {short} further. Extract cohesive groups of \
             methods into separate collaborators and add tests before changing call paths."
        ),
        (MetricKind::Rfc, NoVariance) => {
            "Avoid growing the response set beyond the uniform project level.".into()
        }

        (MetricKind::Lcom, Favorable) => {
            "Maintain cohesion: if a change introduces an unrelated concern, extract a helper.".into()
        }
        (MetricKind::Lcom, Typical) => "Maintain cohesion at the project norm: prefer putting unrelated \
             logic in a new helper class."
            .into(),
        (MetricKind::Lcom, Elevated) => "Review before extending: avoid adding fields that only one \
             method uses; extract such state together with its methods."
            .into(),
        (MetricKind::Lcom, High) => format!(
            "Refactor before modifying: split {short} along the groups of methods that share state."
        ),
        (MetricKind::Lcom, Extreme) => format!(
            "Do not add new responsibilities to {short}. Split it along the groups of methods that \
             share fields, extracting each group into its own class."
        ),
        (MetricKind::Lcom, NoVariance) => {
            "Avoid introducing state that only a single method uses.".into()
        }

        (MetricKind::Wmc, Favorable) => "Guard complexity: split any growing conditional into \
             intention-revealing helpers and add tests."
            .into(),
        (MetricKind::Wmc, Typical) => "Keep complexity in check: extract a helper when a method grows, \
             and add tests for new branches."
            .into(),
        (MetricKind::Wmc, Elevated) => "Review before extending: add tests for the most complex methods \
             before changing them, and prefer small methods for new logic."
            .into(),
        (MetricKind::Wmc, High) => format!(
            "Refactor before modifying: extract the most complex methods of {short} into smaller \
             helpers and add tests around them."
        ),
        (MetricKind::Wmc, Extreme) => format!(
            "Do not add new logic to the largest methods of {short}. Split complex methods into \
             smaller helpers and add tests before changing behavior."
        ),
        (MetricKind::Wmc, NoVariance) => {
            "Avoid adding complex methods beyond the uniform project level.".into()
        }

        (other, Favorable | Typical) => format!(
            "Keep {} where it is: avoid changes that push it above the project norm.",
            other.acronym()
        ),
        (other, Elevated) => format!(
            "Review before extending: avoid increasing {} in this change.",
            other.acronym()
        ),
        (other, High | Extreme) => format!(
            "Refactor before modifying: bring {} in {short} back toward the project norm.",
            other.acronym()
        ),
        (other, NoVariance) => format!(
            "Avoid changes that make {} differ from the uniform project level.",
            other.acronym()
        ),
    }
}
