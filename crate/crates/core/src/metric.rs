//! Metric identifiers and their plain-language meaning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A class-level metric column.
///
/// The four Chidamber-Kemerer kinds used throughout the pipeline are first
/// class; any other dataset column can be carried along as [`MetricKind::Other`].
/// Ordering puts the core kinds first (CBO, RFC, LCOM, WMC), then other
/// columns by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Cbo,
    Rfc,
    Lcom,
    Wmc,
    Other(String),
}

impl MetricKind {
    pub const CORE: [MetricKind; 4] = [
        MetricKind::Cbo,
        MetricKind::Rfc,
        MetricKind::Lcom,
        MetricKind::Wmc,
    ];

    /// Lowercase identifier used in config files, CSV headers and JSON.
    pub fn id(&self) -> &str {
        match self {
            MetricKind::Cbo => "cbo",
            MetricKind::Rfc => "rfc",
            MetricKind::Lcom => "lcom",
            MetricKind::Wmc => "wmc",
            MetricKind::Other(name) => name,
        }
    }

    /// Short uppercase label, e.g. `CBO`.
    pub fn acronym(&self) -> String {
        self.id().to_uppercase()
    }

    pub fn display_name(&self) -> String {
        match self {
            MetricKind::Cbo => "Coupling Between Objects".to_string(),
            MetricKind::Rfc => "Response For a Class".to_string(),
            MetricKind::Lcom => "Lack of Cohesion of Methods".to_string(),
            MetricKind::Wmc => "Weighted Methods per Class".to_string(),
            MetricKind::Other(name) => name.clone(),
        }
    }

    /// One plain-language sentence describing what the metric measures.
    pub fn definition(&self) -> String {
        match self {
            MetricKind::Cbo => "Number of other classes this class depends on; \
                higher = more dependencies and more ripple risk when anything changes."
                .to_string(),
            MetricKind::Rfc => "Number of methods in the class plus the distinct methods \
                they call; higher = a larger behavioral surface."
                .to_string(),
            MetricKind::Lcom => "Degree to which the methods of the class work on \
                different state; higher = mixed responsibilities and lower cohesion."
                .to_string(),
            MetricKind::Wmc => "Sum of the complexities of the methods in the class; \
                higher = more or harder methods to read, test, and maintain."
                .to_string(),
            MetricKind::Other(name) => format!(
                "Measures the dataset column `{name}` for the class; \
                 higher values are treated as riskier."
            ),
        }
    }

    pub fn is_core(&self) -> bool {
        !matches!(self, MetricKind::Other(_))
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.acronym())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let id = s.trim().to_lowercase();
        if id.is_empty() {
            return Err("empty metric name".to_string());
        }
        Ok(match id.as_str() {
            "cbo" => MetricKind::Cbo,
            "rfc" => MetricKind::Rfc,
            "lcom" => MetricKind::Lcom,
            "wmc" => MetricKind::Wmc,
            _ => MetricKind::Other(id),
        })
    }
}

impl Serialize for MetricKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for MetricKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Metric values print as integers when integral, otherwise with two decimals.
pub fn format_value(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value:.2}")
    }
}
