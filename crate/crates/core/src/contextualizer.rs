//! Severity bands and interpretation phrases for metric values measured
//! against a project baseline.
//!
//! All core metrics are oriented "higher = riskier", so negative distances
//! are favorable.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{format_signed_z, ProjectBaseline, SigmaDistance};
use crate::dataset::{ClassRecord, ProjectDataset};
use crate::metric::{format_value, MetricKind};

#[derive(Debug, Error, PartialEq)]
pub enum ContextError {
    #[error("baseline has no statistics for metric {0}")]
    MissingBaselineMetric(MetricKind),
    #[error("invalid severity thresholds: {0}")]
    InvalidThresholds(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeverityBand {
    Favorable,
    Typical,
    Elevated,
    High,
    Extreme,
    NoVariance,
}

impl SeverityBand {
    pub const RANKED: [SeverityBand; 5] = [
        SeverityBand::Favorable,
        SeverityBand::Typical,
        SeverityBand::Elevated,
        SeverityBand::High,
        SeverityBand::Extreme,
    ];

    /// Position in the favorable..extreme order; `None` for no-variance.
    pub fn rank(self) -> Option<u8> {
        match self {
            SeverityBand::Favorable => Some(0),
            SeverityBand::Typical => Some(1),
            SeverityBand::Elevated => Some(2),
            SeverityBand::High => Some(3),
            SeverityBand::Extreme => Some(4),
            SeverityBand::NoVariance => None,
        }
    }

    /// Total order used for sorting reports: no-variance sorts below favorable.
    pub fn sort_key(self) -> i8 {
        self.rank().map(|r| r as i8).unwrap_or(-1)
    }

    /// Compare two ranked bands; `None` if either is no-variance.
    pub fn severity_cmp(self, other: SeverityBand) -> Option<Ordering> {
        Some(self.rank()?.cmp(&other.rank()?))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SeverityBand::Favorable => "favorable",
            SeverityBand::Typical => "typical",
            SeverityBand::Elevated => "elevated",
            SeverityBand::High => "high",
            SeverityBand::Extreme => "extreme",
            SeverityBand::NoVariance => "no-variance",
        }
    }

    /// Elevated, high or extreme.
    pub fn is_concerning(self) -> bool {
        matches!(
            self,
            SeverityBand::Elevated | SeverityBand::High | SeverityBand::Extreme
        )
    }
}

impl fmt::Display for SeverityBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeverityBand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('_', "-").as_str() {
            "favorable" => Ok(SeverityBand::Favorable),
            "typical" => Ok(SeverityBand::Typical),
            "elevated" => Ok(SeverityBand::Elevated),
            "high" => Ok(SeverityBand::High),
            "extreme" => Ok(SeverityBand::Extreme),
            "no-variance" => Ok(SeverityBand::NoVariance),
            other => Err(format!("unknown severity band `{other}`")),
        }
    }
}

/// Lower bounds (in σ) of the bands above favorable. Intervals are half-open:
/// a value exactly on a boundary belongs to the higher band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeverityThresholds {
    pub typical_from: f64,
    pub elevated_from: f64,
    pub high_from: f64,
    pub extreme_from: f64,
}

impl Default for SeverityThresholds {
    fn default() -> Self {
        SeverityThresholds {
            typical_from: -0.25,
            elevated_from: 1.0,
            high_from: 2.0,
            extreme_from: 4.0,
        }
    }
}

impl SeverityThresholds {
    pub fn validate(&self) -> Result<(), ContextError> {
        let t = [
            self.typical_from,
            self.elevated_from,
            self.high_from,
            self.extreme_from,
        ];
        if t.iter().any(|v| !v.is_finite()) {
            return Err(ContextError::InvalidThresholds("non-finite bound".into()));
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ContextError::InvalidThresholds(format!(
                "bounds must be strictly increasing, got {t:?}"
            )));
        }
        Ok(())
    }

    pub fn classify(&self, distance: SigmaDistance) -> SeverityBand {
        let Some(z) = distance.value() else {
            return SeverityBand::NoVariance;
        };
        if z >= self.extreme_from {
            SeverityBand::Extreme
        } else if z >= self.high_from {
            SeverityBand::High
        } else if z >= self.elevated_from {
            SeverityBand::Elevated
        } else if z >= self.typical_from {
            SeverityBand::Typical
        } else {
            SeverityBand::Favorable
        }
    }
}

/// Band for `distance` under the default thresholds.
pub fn classify_severity(distance: SigmaDistance) -> SeverityBand {
    SeverityThresholds::default().classify(distance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualAssessment {
    pub metric: MetricKind,
    pub value: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub distance: SigmaDistance,
    pub band: SeverityBand,
    pub phrase: String,
}

impl ContextualAssessment {
    pub fn new(
        metric: MetricKind,
        value: f64,
        mean: f64,
        std_dev: f64,
        band: SeverityBand,
    ) -> Self {
        let distance = crate::baseline::sigma_distance(value, mean, std_dev);
        let phrase = render_phrase(&metric, value, distance, band);
        ContextualAssessment {
            metric,
            value,
            mean,
            std_dev,
            distance,
            band,
            phrase,
        }
    }
}

/// Fixed per-band sentence, e.g.
/// `CBO = 448 → Extreme outlier (~19.4σ above the mean).`
pub fn render_phrase(
    metric: &MetricKind,
    value: f64,
    distance: SigmaDistance,
    band: SeverityBand,
) -> String {
    let name = metric.acronym();
    let value = format_value(value);
    let magnitude = format!("{:.1}", distance.z.abs());
    match band {
        SeverityBand::Extreme => {
            format!("{name} = {value} → Extreme outlier (~{magnitude}σ above the mean).")
        }
        SeverityBand::High => {
            format!("{name} = {value} → High for this project (~{magnitude}σ above the mean).")
        }
        SeverityBand::Elevated => format!(
            "{name} = {value} → Elevated for this project (~{magnitude}σ above the mean)."
        ),
        SeverityBand::Typical => format!(
            "{name} = {value} → Typical for this project ({}σ from the mean).",
            format_signed_z(distance.z)
        ),
        SeverityBand::Favorable => format!(
            "{name} = {value} → Below the project norm (~{magnitude}σ below the mean)."
        ),
        SeverityBand::NoVariance => format!(
            "{name} = {value} → No variance: every class in this project has the same {name} (σ = 0)."
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRiskProfile {
    pub class_name: String,
    /// Record index in the source dataset, when assessed as part of one.
    #[serde(default)]
    pub row: Option<usize>,
    pub assessments: Vec<ContextualAssessment>,
    /// Metrics whose value was missing in the source data.
    #[serde(default)]
    pub unavailable: Vec<MetricKind>,
    pub bug_count: u64,
    /// 1 = most documented bugs in the project (dense ranking).
    #[serde(default)]
    pub bug_rank: Option<usize>,
    pub overall_band: SeverityBand,
}

impl ClassRiskProfile {
    pub fn simple_name(&self) -> &str {
        crate::dataset::simple_class_name(&self.class_name)
    }

    pub fn assessment(&self, metric: &MetricKind) -> Option<&ContextualAssessment> {
        self.assessments.iter().find(|a| a.metric == *metric)
    }

    /// Largest defined z across assessments.
    pub fn max_z(&self) -> Option<f64> {
        self.assessments
            .iter()
            .filter_map(|a| a.distance.value())
            .fold(None, |acc, z| Some(acc.map_or(z, |m: f64| m.max(z))))
    }
}

/// Maximum ranked band, ignoring no-variance; no-variance when nothing is ranked.
pub fn overall_band(assessments: &[ContextualAssessment]) -> SeverityBand {
    assessments
        .iter()
        .map(|a| a.band)
        .filter(|b| b.rank().is_some())
        .max_by_key(|b| b.rank())
        .unwrap_or(SeverityBand::NoVariance)
}

pub fn assess_class(
    record: &ClassRecord,
    baseline: &ProjectBaseline,
    thresholds: &SeverityThresholds,
) -> Result<ClassRiskProfile, ContextError> {
    let mut assessments = Vec::new();
    let mut unavailable = Vec::new();
    for (kind, value) in &record.metrics {
        let Some(value) = value else {
            unavailable.push(kind.clone());
            continue;
        };
        let stats = baseline
            .get(kind)
            .ok_or_else(|| ContextError::MissingBaselineMetric(kind.clone()))?;
        let band = thresholds.classify(stats.distance(*value));
        assessments.push(ContextualAssessment::new(
            kind.clone(),
            *value,
            stats.mean,
            stats.std_dev,
            band,
        ));
    }
    Ok(ClassRiskProfile {
        class_name: record.class_name.clone(),
        row: None,
        overall_band: overall_band(&assessments),
        assessments,
        unavailable,
        bug_count: record.bug_count,
        bug_rank: None,
    })
}

/// Assesses every record, filling in row indices and bug ranks.
///
/// Metrics absent from the baseline are skipped rather than rejected, so a
/// baseline over a subset of columns can be applied to a wider dataset.
pub fn assess_dataset(
    dataset: &ProjectDataset,
    baseline: &ProjectBaseline,
    thresholds: &SeverityThresholds,
) -> Result<Vec<ClassRiskProfile>, ContextError> {
    let mut distinct: Vec<u64> = dataset.records.iter().map(|r| r.bug_count).collect();
    distinct.sort_unstable_by(|a, b| b.cmp(a));
    distinct.dedup();

    dataset
        .records
        .iter()
        .enumerate()
        .map(|(row, record)| {
            let mut scoped = record.clone();
            scoped.metrics.retain(|k, _| baseline.get(k).is_some());
            let mut profile = assess_class(&scoped, baseline, thresholds)?;
            profile.row = Some(row);
            profile.bug_rank = distinct
                .iter()
                .position(|b| *b == record.bug_count)
                .map(|p| p + 1);
            Ok(profile)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::sigma_distance;

    fn z(v: f64) -> SigmaDistance {
        SigmaDistance {
            z: v,
            defined: true,
        }
    }

    pub(crate) fn camel() -> ProjectBaseline {
        ProjectBaseline::from_figures(
            "Apache Camel",
            "1.6",
            &[
                (MetricKind::Cbo, 11.10, 22.52),
                (MetricKind::Rfc, 21.20, 25.00),
                (MetricKind::Lcom, 79.33, 523.75),
                (MetricKind::Wmc, 8.57, 11.20),
            ],
        )
    }

    pub(crate) fn ant() -> ProjectBaseline {
        ProjectBaseline::from_figures(
            "Apache Ant",
            "1.7",
            &[
                (MetricKind::Cbo, 11.04, 26.34),
                (MetricKind::Rfc, 34.36, 36.02),
                (MetricKind::Lcom, 89.14, 349.93),
                (MetricKind::Wmc, 11.07, 11.97),
            ],
        )
    }

    fn record(name: &str, cbo: f64, rfc: f64, lcom: f64, wmc: f64) -> ClassRecord {
        ClassRecord::new(name, 0)
            .with_metric(MetricKind::Cbo, cbo)
            .with_metric(MetricKind::Rfc, rfc)
            .with_metric(MetricKind::Lcom, lcom)
            .with_metric(MetricKind::Wmc, wmc)
    }

    #[test]
    fn band_examples() {
        assert_eq!(classify_severity(z(19.40)), SeverityBand::Extreme);
        assert_eq!(classify_severity(z(0.19)), SeverityBand::Typical);
        assert_eq!(classify_severity(z(0.0)), SeverityBand::Typical);
        assert_eq!(classify_severity(z(-0.305)), SeverityBand::Favorable);
        assert_eq!(
            classify_severity(sigma_distance(1.0, 1.0, 0.0)),
            SeverityBand::NoVariance
        );
    }

    #[test]
    fn boundaries_belong_to_the_higher_band() {
        assert_eq!(classify_severity(z(-0.25)), SeverityBand::Typical);
        assert_eq!(classify_severity(z(1.0)), SeverityBand::Elevated);
        assert_eq!(classify_severity(z(2.0)), SeverityBand::High);
        assert_eq!(classify_severity(z(4.0)), SeverityBand::Extreme);
        let below = |b: f64| classify_severity(z(f64::from_bits(b.to_bits() - 1)));
        assert_eq!(below(1.0), SeverityBand::Typical);
        assert_eq!(below(2.0), SeverityBand::Elevated);
        assert_eq!(below(4.0), SeverityBand::High);
        assert_eq!(classify_severity(z(-0.25 - 1e-12)), SeverityBand::Favorable);
    }

    #[test]
    fn thresholds_must_increase() {
        let bad = SeverityThresholds {
            high_from: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(SeverityThresholds::default().validate().is_ok());
    }

    #[test]
    fn exchange_against_camel() {
        let profile = assess_class(
            &record("Exchange.java", 448.0, 26.0, 325.0, 26.0),
            &camel(),
            &SeverityThresholds::default(),
        )
        .unwrap();
        let band = |k| profile.assessment(&k).unwrap().band;
        assert_eq!(band(MetricKind::Cbo), SeverityBand::Extreme);
        assert_eq!(band(MetricKind::Rfc), SeverityBand::Typical);
        assert_eq!(band(MetricKind::Lcom), SeverityBand::Typical);
        assert_eq!(band(MetricKind::Wmc), SeverityBand::Elevated);
        assert_eq!(profile.overall_band, SeverityBand::Extreme);
        // (325 - 79.33) / 523.75 and (26 - 8.57) / 11.20
        let lz = profile.assessment(&MetricKind::Lcom).unwrap().distance.z;
        let wz = profile.assessment(&MetricKind::Wmc).unwrap().distance.z;
        assert!((lz - 0.46906).abs() < 1e-4);
        assert!((wz - 1.55625).abs() < 1e-4);
        assert_eq!(
            profile.assessment(&MetricKind::Cbo).unwrap().phrase,
            "CBO = 448 → Extreme outlier (~19.4σ above the mean)."
        );
        assert_eq!(
            profile.assessment(&MetricKind::Rfc).unwrap().phrase,
            "RFC = 26 → Typical for this project (+0.2σ from the mean)."
        );
    }

    #[test]
    fn dispatch_task_against_ant() {
        let profile = assess_class(
            &record("DispatchTask.java", 3.0, 5.0, 4.0, 4.0),
            &ant(),
            &SeverityThresholds::default(),
        )
        .unwrap();
        for a in &profile.assessments {
            assert!(
                matches!(a.band, SeverityBand::Favorable | SeverityBand::Typical),
                "{a:?}"
            );
        }
        assert_eq!(profile.overall_band, SeverityBand::Typical);
        assert_eq!(
            profile.assessment(&MetricKind::Cbo).unwrap().phrase,
            "CBO = 3 → Below the project norm (~0.3σ below the mean)."
        );
    }

    #[test]
    fn mean_valued_class_is_typical() {
        let b = camel();
        let profile = assess_class(
            &record("M", 11.10, 21.20, 79.33, 8.57),
            &b,
            &SeverityThresholds::default(),
        )
        .unwrap();
        assert!(profile
            .assessments
            .iter()
            .all(|a| a.band == SeverityBand::Typical));
        assert_eq!(profile.overall_band, SeverityBand::Typical);
    }

    #[test]
    fn missing_baseline_metric_is_named() {
        let rec = record("X", 1.0, 1.0, 1.0, 1.0).with_metric(MetricKind::Other("loc".into()), 3.0);
        let err = assess_class(&rec, &camel(), &SeverityThresholds::default()).unwrap_err();
        assert_eq!(
            err,
            ContextError::MissingBaselineMetric(MetricKind::Other("loc".into()))
        );
    }

    #[test]
    fn missing_values_are_unavailable_not_assessed() {
        let mut rec = record("X", 1.0, 1.0, 1.0, 1.0);
        rec.metrics.insert(MetricKind::Lcom, None);
        let p = assess_class(&rec, &camel(), &SeverityThresholds::default()).unwrap();
        assert_eq!(p.assessments.len(), 3);
        assert_eq!(p.unavailable, vec![MetricKind::Lcom]);
    }

    #[test]
    fn overall_ignores_no_variance() {
        let b = ProjectBaseline::from_figures(
            "P",
            "",
            &[(MetricKind::Cbo, 5.0, 0.0), (MetricKind::Rfc, 5.0, 1.0)],
        );
        let rec = ClassRecord::new("X", 0)
            .with_metric(MetricKind::Cbo, 9.0)
            .with_metric(MetricKind::Rfc, 5.0);
        let p = assess_class(&rec, &b, &SeverityThresholds::default()).unwrap();
        assert_eq!(
            p.assessment(&MetricKind::Cbo).unwrap().band,
            SeverityBand::NoVariance
        );
        assert_eq!(p.overall_band, SeverityBand::Typical);

        let only = ClassRecord::new("Y", 0).with_metric(MetricKind::Cbo, 1.0);
        let p = assess_class(&only, &b, &SeverityThresholds::default()).unwrap();
        assert_eq!(p.overall_band, SeverityBand::NoVariance);
    }

    #[test]
    fn phrases_embed_name_value_and_z() {
        let d = sigma_distance(40.0, 10.0, 10.0);
        let p = render_phrase(&MetricKind::Wmc, 40.0, d, SeverityBand::High);
        assert!(p.contains("WMC") && p.contains("40") && p.contains("3.0σ"));
        let nv = render_phrase(
            &MetricKind::Wmc,
            4.0,
            sigma_distance(4.0, 4.0, 0.0),
            SeverityBand::NoVariance,
        );
        assert!(nv.contains("WMC = 4") && !nv.contains("NaN"));
    }

    #[test]
    fn bug_rank_is_dense_and_descending() {
        use crate::dataset::{ColumnMapping, LoadReport};
        let mk = |n: &str, bugs| {
            let mut r = record(n, 1.0, 1.0, 1.0, 1.0);
            r.bug_count = bugs;
            r
        };
        let ds = ProjectDataset {
            project_name: "P".into(),
            version: String::new(),
            records: vec![mk("A", 0), mk("B", 3), mk("C", 1), mk("D", 3)],
            column_mapping: ColumnMapping::default(),
            load_report: LoadReport::default(),
        };
        let profiles = assess_dataset(&ds, &camel(), &SeverityThresholds::default()).unwrap();
        let ranks: Vec<_> = profiles.iter().map(|p| p.bug_rank.unwrap()).collect();
        assert_eq!(ranks, vec![3, 1, 2, 1]);
        assert_eq!(profiles[2].row, Some(2));
    }

    #[test]
    fn band_ordering() {
        for w in SeverityBand::RANKED.windows(2) {
            assert_eq!(w[0].severity_cmp(w[1]), Some(Ordering::Less));
        }
        assert_eq!(
            SeverityBand::NoVariance.severity_cmp(SeverityBand::Typical),
            None
        );
        assert!(SeverityBand::NoVariance.sort_key() < SeverityBand::Favorable.sort_key());
        assert_eq!(
            "no_variance".parse::<SeverityBand>().unwrap(),
            SeverityBand::NoVariance
        );
    }
}
