//! Lexical coverage check for the three explanation categories:
//! descriptive (what each metric measures), contextual (how the value sits
//! against the project baseline) and actionable (what to do about it).
//!
//! Matching is case-insensitive and works sentence by sentence. A cue
//! matches at a word start and may run on into a longer word ("refactor"
//! matches "refactoring"); this keeps the result monotone when text is
//! appended. A cue written as `a … b` (or `a ... b`) needs `a` followed
//! later in the same sentence by `b`.

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, Explanation, ExplanationBackend, GenerationRequest};
use crate::contextualizer::ClassRiskProfile;
use crate::metric::MetricKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaxonomyCues {
    pub definitional: Vec<String>,
    pub baseline: Vec<String>,
    pub imperative: Vec<String>,
}

impl Default for TaxonomyCues {
    fn default() -> Self {
        let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        TaxonomyCues {
            definitional: owned(&[
                "measures",
                "number of",
                "how many",
                "degree to which",
                "sum of",
                "is defined",
            ]),
            baseline: owned(&["σ", "sigma", "mean", "baseline", "average"]),
            imperative: owned(&[
                "refactor",
                "extract",
                "avoid",
                "split",
                "prefer",
                "do not",
                "add tests",
                "hide … behind",
            ]),
        }
    }
}

impl TaxonomyCues {
    /// Adds extra cues on top of the current lists.
    pub fn extend(&mut self, other: &TaxonomyCues) {
        self.definitional.extend(other.definitional.iter().cloned());
        self.baseline.extend(other.baseline.iter().cloned());
        self.imperative.extend(other.imperative.iter().cloned());
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSpan {
    /// Character (not byte) offsets into the validated text, end exclusive.
    pub start: usize,
    pub end: usize,
    pub excerpt: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryEvidence {
    pub descriptive: Vec<EvidenceSpan>,
    pub contextual: Vec<EvidenceSpan>,
    pub actionable: Vec<EvidenceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyCoverage {
    pub has_descriptive: bool,
    pub has_contextual: bool,
    pub has_actionable: bool,
    pub evidence: CategoryEvidence,
    pub complete: bool,
}

impl TaxonomyCoverage {
    pub fn categories_covered(&self) -> usize {
        [
            self.has_descriptive,
            self.has_contextual,
            self.has_actionable,
        ]
        .iter()
        .filter(|b| **b)
        .count()
    }

    /// `"descriptive ✓, contextual ✓, actionable ✗ (incomplete)"`.
    pub fn describe(&self) -> String {
        let mark = |b: bool| if b { "✓" } else { "✗" };
        format!(
            "descriptive {}, contextual {}, actionable {} ({})",
            mark(self.has_descriptive),
            mark(self.has_contextual),
            mark(self.has_actionable),
            if self.complete {
                "complete"
            } else {
                "incomplete"
            }
        )
    }
}

/// Text folded to lowercase one char at a time so offsets stay aligned.
struct Folded {
    original: Vec<char>,
    lower: Vec<char>,
}

impl Folded {
    fn new(text: &str) -> Self {
        let original: Vec<char> = text.chars().collect();
        let lower = original.iter().map(|c| fold_char(*c)).collect();
        Folded { original, lower }
    }

    fn sentences(&self) -> Vec<(usize, usize)> {
        let chars = &self.lower;
        let mut out = Vec::new();
        let mut start = 0;
        let push = |out: &mut Vec<(usize, usize)>, s: usize, e: usize| {
            let mut s = s;
            let mut e = e;
            while s < e && chars[s].is_whitespace() {
                s += 1;
            }
            while e > s && chars[e - 1].is_whitespace() {
                e -= 1;
            }
            if s < e {
                out.push((s, e));
            }
        };
        for i in 0..chars.len() {
            let c = chars[i];
            let boundary = c == '\n'
                || (matches!(c, '.' | '!' | '?')
                    && chars.get(i + 1).is_some_and(|n| n.is_whitespace()));
            if boundary {
                push(&mut out, start, i + 1);
                start = i + 1;
            }
        }
        push(&mut out, start, chars.len());
        out
    }

    fn span(&self, (start, end): (usize, usize)) -> EvidenceSpan {
        EvidenceSpan {
            start,
            end,
            excerpt: self.original[start..end].iter().collect(),
        }
    }
}

fn fold_char(c: char) -> char {
    match c {
        'ς' => 'σ',
        _ => c.to_lowercase().next().unwrap_or(c),
    }
}

fn fold(s: &str) -> Vec<char> {
    s.chars().map(fold_char).collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Positions in `hay` where `needle` starts at a word start.
fn find_word_starts<'a>(hay: &'a [char], needle: &'a [char]) -> impl Iterator<Item = usize> + 'a {
    let needle = needle.to_vec();
    (0..hay.len().saturating_sub(needle.len().saturating_sub(1))).filter(move |&i| {
        !needle.is_empty()
            && hay[i..].starts_with(&needle)
            && (i == 0 || !is_word_char(hay[i - 1]) || !needle[0].is_ascii_alphanumeric())
    })
}

fn cue_matches(sentence: &[char], cue: &str) -> bool {
    let normalized = cue.replace("...", "…");
    let parts: Vec<Vec<char>> = normalized
        .split('…')
        .map(|p| fold(p.trim()))
        .filter(|p| !p.is_empty())
        .collect();
    let mut from = 0;
    for part in &parts {
        match find_word_starts(&sentence[from..], part).next() {
            Some(at) => from += at + part.len(),
            None => return false,
        }
    }
    !parts.is_empty()
}

fn has_z_figure(sentence: &[char]) -> bool {
    // "z=1.2", "z = -0.3"
    find_word_starts(sentence, &['z']).any(|i| {
        let mut j = i + 1;
        while j < sentence.len() && sentence[j] == ' ' {
            j += 1;
        }
        if sentence.get(j) != Some(&'=') {
            return false;
        }
        j += 1;
        while j < sentence.len() && matches!(sentence[j], ' ' | '+' | '-' | '−' | '~') {
            j += 1;
        }
        sentence.get(j).is_some_and(|c| c.is_ascii_digit())
    })
}

fn mentions(sentence: &[char], metric: &MetricKind) -> bool {
    let acronym = fold(metric.id());
    find_word_starts(sentence, &acronym).next().is_some()
        || find_word_starts(sentence, &fold(&metric.display_name()))
            .next()
            .is_some()
}

/// Checks `text` for each explanation category, collecting the sentences
/// that satisfy it. Descriptive coverage requires a definitional sentence for
/// every assessed metric in `profile`; the other two need one sentence each.
pub fn validate(text: &str, profile: &ClassRiskProfile) -> TaxonomyCoverage {
    validate_with(text, profile, &TaxonomyCues::default())
}

pub fn validate_with(
    text: &str,
    profile: &ClassRiskProfile,
    cues: &TaxonomyCues,
) -> TaxonomyCoverage {
    let folded = Folded::new(text);
    let sentences = folded.sentences();

    let mut required: Vec<MetricKind> = profile
        .assessments
        .iter()
        .map(|a| a.metric.clone())
        .collect();
    required.dedup();
    let mention_set: Vec<MetricKind> = if required.is_empty() {
        MetricKind::CORE.to_vec()
    } else {
        required.clone()
    };

    let any_cue = |s: &[char], list: &[String]| list.iter().any(|c| cue_matches(s, c));

    let mut evidence = CategoryEvidence::default();

    let definitional: Vec<(usize, usize)> = sentences
        .iter()
        .copied()
        .filter(|(s, e)| any_cue(&folded.lower[*s..*e], &cues.definitional))
        .collect();
    let defined = |m: &MetricKind| {
        definitional
            .iter()
            .copied()
            .find(|(s, e)| mentions(&folded.lower[*s..*e], m))
    };
    let has_descriptive = if required.is_empty() {
        let hit = definitional.iter().copied().find(|(s, e)| {
            mention_set
                .iter()
                .any(|m| mentions(&folded.lower[*s..*e], m))
        });
        if let Some(span) = hit {
            evidence.descriptive.push(folded.span(span));
        }
        hit.is_some()
    } else {
        let hits: Vec<Option<(usize, usize)>> = required.iter().map(defined).collect();
        let mut spans: Vec<(usize, usize)> = hits.iter().flatten().copied().collect();
        spans.sort_unstable();
        spans.dedup();
        evidence
            .descriptive
            .extend(spans.into_iter().map(|s| folded.span(s)));
        hits.iter().all(Option::is_some)
    };

    for &(s, e) in &sentences {
        let sentence = &folded.lower[s..e];
        let mentions_metric = mention_set.iter().any(|m| mentions(sentence, m));
        if mentions_metric && (any_cue(sentence, &cues.baseline) || has_z_figure(sentence)) {
            evidence.contextual.push(folded.span((s, e)));
        }
        if any_cue(sentence, &cues.imperative) {
            evidence.actionable.push(folded.span((s, e)));
        }
    }

    let has_contextual = !evidence.contextual.is_empty();
    let has_actionable = !evidence.actionable.is_empty();
    TaxonomyCoverage {
        has_descriptive,
        has_contextual,
        has_actionable,
        complete: has_descriptive && has_contextual && has_actionable,
        evidence,
    }
}

/// True when `text` contains any imperative cue, anywhere.
pub fn contains_actionable_cue(text: &str, cues: &TaxonomyCues) -> bool {
    let folded = Folded::new(text);
    folded.sentences().iter().any(|(s, e)| {
        cues.imperative
            .iter()
            .any(|c| cue_matches(&folded.lower[*s..*e], c))
    })
}

/// Generates, validates, and regenerates while coverage is incomplete.
///
/// Deterministic backends are asked once. Otherwise up to
/// `max_regenerations` further attempts are made; the attempt covering the
/// most categories wins, with the earliest one kept on ties.
pub fn validate_and_retry(
    backend: &dyn ExplanationBackend,
    request: &GenerationRequest<'_>,
    max_regenerations: u32,
    cues: &TaxonomyCues,
) -> Result<(Explanation, TaxonomyCoverage), BackendError> {
    let mut best: Option<(Explanation, TaxonomyCoverage)> = None;
    for _ in 0..=max_regenerations {
        let explanation = backend.generate(request)?;
        let coverage = validate_with(&explanation.text, request.profile, cues);
        let better = best
            .as_ref()
            .is_none_or(|(_, b)| coverage.categories_covered() > b.categories_covered());
        let complete = coverage.complete;
        if better {
            best = Some((explanation, coverage));
        }
        if complete || backend.is_deterministic() {
            break;
        }
    }
    Ok(best.expect("at least one attempt is made"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::ProjectBaseline;
    use crate::contextualizer::{assess_class, SeverityThresholds};
    use crate::dataset::ClassRecord;

    fn profile(metrics: &[MetricKind]) -> ClassRiskProfile {
        let figures: Vec<_> = metrics.iter().map(|k| (k.clone(), 10.0, 5.0)).collect();
        let baseline = ProjectBaseline::from_figures("P", "", &figures);
        let mut record = ClassRecord::new("Exchange.java", 0);
        for k in metrics {
            record = record.with_metric(k.clone(), 12.0);
        }
        assess_class(&record, &baseline, &SeverityThresholds::default()).unwrap()
    }

    #[test]
    fn bare_restatement_covers_nothing() {
        let cov = validate("CBO is 448.", &profile(&[MetricKind::Cbo]));
        assert!(!cov.has_descriptive && !cov.has_contextual && !cov.has_actionable);
        assert!(!cov.complete);
        assert_eq!(cov.categories_covered(), 0);
    }

    #[test]
    fn all_three_categories() {
        let text = "CBO measures how many other classes a class touches.\n\
                    CBO = 448 → Extreme outlier (~19.4σ above the mean).\n\
                    Do not add new dependencies to Exchange.";
        let cov = validate(text, &profile(&[MetricKind::Cbo]));
        assert!(cov.complete, "{cov:?}");
        assert_eq!(cov.evidence.descriptive.len(), 1);
        assert_eq!(
            cov.evidence.actionable[0].excerpt,
            "Do not add new dependencies to Exchange."
        );
    }

    #[test]
    fn descriptive_needs_every_metric() {
        let p = profile(&[MetricKind::Cbo, MetricKind::Rfc]);
        let text = "CBO is the number of classes this one depends on.";
        assert!(!validate(text, &p).has_descriptive);
        let text = format!("{text} RFC measures the response set.");
        let cov = validate(&text, &p);
        assert!(cov.has_descriptive);
        assert_eq!(cov.evidence.descriptive.len(), 2);
    }

    #[test]
    fn display_names_count_as_mentions() {
        let p = profile(&[MetricKind::Lcom]);
        let cov = validate(
            "Lack of Cohesion of Methods is the degree to which methods share no state.",
            &p,
        );
        assert!(cov.has_descriptive);
    }

    #[test]
    fn contextual_needs_metric_in_same_sentence() {
        let p = profile(&[MetricKind::Wmc]);
        assert!(!validate("The mean is high. WMC is 12.", &p).has_contextual);
        assert!(validate("WMC is above the project average.", &p).has_contextual);
        assert!(validate("WMC sits at z = +1.6 here.", &p).has_contextual);
        assert!(!validate("WMC sits at z = here.", &p).has_contextual);
    }

    #[test]
    fn ordered_pair_cue() {
        let p = profile(&[MetricKind::Cbo]);
        assert!(validate("Hide the concrete types behind interfaces.", &p).has_actionable);
        assert!(!validate("Behind the scenes we hide nothing.", &p).has_actionable);
    }

    #[test]
    fn cues_match_at_word_starts_only() {
        let p = profile(&[MetricKind::Cbo]);
        assert!(validate("Consider refactoring this.", &p).has_actionable);
        // "unavoidable" must not trigger "avoid"
        assert!(!validate("This was unavoidable.", &p).has_actionable);
    }

    #[test]
    fn evidence_offsets_are_character_offsets() {
        let text = "σσ WMC measures weight. WMC is 2σ above.";
        let cov = validate(text, &profile(&[MetricKind::Wmc]));
        for span in cov
            .evidence
            .descriptive
            .iter()
            .chain(&cov.evidence.contextual)
        {
            let got: String = text
                .chars()
                .skip(span.start)
                .take(span.end - span.start)
                .collect();
            assert_eq!(got, span.excerpt);
        }
        assert!(cov.has_contextual);
    }

    #[test]
    fn extra_cues_extend_defaults() {
        let p = profile(&[MetricKind::Cbo]);
        let mut cues = TaxonomyCues::default();
        cues.extend(&TaxonomyCues {
            definitional: vec![],
            baseline: vec![],
            imperative: vec!["decouple".into()],
        });
        assert!(validate_with("Decouple it.", &p, &cues).has_actionable);
        assert!(!validate("Decouple it.", &p).has_actionable);
    }

    #[test]
    fn case_folding_handles_final_sigma() {
        let p = profile(&[MetricKind::Cbo]);
        let upper = "CBO IS 19.4Σ ABOVE";
        assert!(validate(upper, &p).has_contextual);
        assert!(validate(&upper.to_lowercase(), &p).has_contextual);
    }
}
