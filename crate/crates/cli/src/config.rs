//! Run configuration: defaults, then environment, then the TOML config
//! file, then command-line flags. The API key is read from the environment
//! and nowhere else.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use riskexplain::backend::{BackendConfig, BackendKind, API_KEY_ENV};
use riskexplain::report::{ReportFormat, ReportMode};
use riskexplain::taxonomy::TaxonomyCues;
use riskexplain::{ColumnMapping, MetricKind, PromptConfig, SeverityThresholds};
use serde::Deserialize;

use crate::error::CliError;

pub const ENDPOINT_ENV: &str = "RISKEXPLAIN_ENDPOINT";
pub const MODEL_ENV: &str = "RISKEXPLAIN_MODEL";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub max_regenerations: Option<u32>,
    pub dataset: DatasetSection,
    pub prompt: Option<PromptConfig>,
    pub backend: Option<BackendSection>,
    pub thresholds: Option<SeverityThresholds>,
    pub report: ReportSection,
    /// Extra cues appended to the built-in lists.
    pub cues: Option<TaxonomyCues>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub project: Option<String>,
    pub version: Option<String>,
    pub class_column: Option<String>,
    pub bug_column: Option<String>,
    pub version_column: Option<String>,
    /// Metric id to source header, e.g. `cbo = "CBO"`.
    pub columns: BTreeMap<String, String>,
}

/// Backend settings as they may appear in the file. Every field is
/// optional so that unset keys fall through to the environment.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub backend: Option<BackendKind>,
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
    pub temperature: Option<f64>,
    pub max_retries: Option<u32>,
    pub request_timeout_secs: Option<u64>,
    pub max_parallel: Option<usize>,
    pub backoff_base_ms: Option<u64>,
    pub system_message: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub mode: Option<ReportMode>,
    pub format: Option<ReportFormat>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("reading config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::input(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset_path: PathBuf,
    pub project_name: String,
    pub version: String,
    pub mapping: ColumnMapping,
    pub prompt: PromptConfig,
    pub backend: BackendConfig,
    pub thresholds: SeverityThresholds,
    pub cues: TaxonomyCues,
    pub max_regenerations: u32,
    pub mode: ReportMode,
    pub format: ReportFormat,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

/// Flag values that override the file; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub project: Option<String>,
    pub version: Option<String>,
    pub audience: Option<String>,
    pub project_label: Option<String>,
    pub no_baseline: bool,
    pub backend: Option<BackendKind>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub max_retries: Option<u32>,
    pub max_parallel: Option<usize>,
    pub max_regenerations: Option<u32>,
    pub cache_dir: Option<PathBuf>,
    pub no_cache: bool,
    pub reproducible: bool,
    pub mode: Option<ReportMode>,
    pub format: Option<ReportFormat>,
    pub out_dir: Option<PathBuf>,
}

pub fn resolve(
    dataset_path: &Path,
    file: FileConfig,
    flags: &Overrides,
    env: &dyn Fn(&str) -> Option<String>,
) -> Result<RunConfig, CliError> {
    let (guessed_name, guessed_version) = infer_identity(dataset_path);
    let project_name = flags
        .project
        .clone()
        .or(file.dataset.project.clone())
        .unwrap_or(guessed_name);
    let version = flags
        .version
        .clone()
        .or(file.dataset.version.clone())
        .unwrap_or(guessed_version);

    let mapping = column_mapping(&file.dataset)?;

    let mut prompt = file.prompt.unwrap_or_default();
    if let Some(a) = &flags.audience {
        prompt.audience = a.clone();
    }
    if let Some(l) = &flags.project_label {
        prompt.project_label = Some(l.clone());
    }
    if flags.no_baseline {
        prompt.include_baseline = false;
    }

    let backend = backend_config(file.backend.unwrap_or_default(), flags, env)?;

    let thresholds = file.thresholds.unwrap_or_default();
    thresholds
        .validate()
        .map_err(|e| CliError::input(e.to_string()))?;

    let mut cues = TaxonomyCues::default();
    if let Some(extra) = &file.cues {
        cues.extend(extra);
    }

    let cache_dir = if flags.no_cache && !flags.reproducible {
        None
    } else {
        Some(
            flags
                .cache_dir
                .clone()
                .or(file.cache_dir)
                .unwrap_or_else(|| default_cache_dir(env)),
        )
    };

    Ok(RunConfig {
        dataset_path: dataset_path.to_path_buf(),
        project_name,
        version,
        mapping,
        prompt,
        backend,
        thresholds,
        cues,
        max_regenerations: flags
            .max_regenerations
            .or(file.max_regenerations)
            .unwrap_or(2),
        mode: flags.mode.or(file.report.mode).unwrap_or_default(),
        format: flags.format.or(file.report.format).unwrap_or_default(),
        cache_dir,
        out_dir: flags.out_dir.clone().or(file.out_dir),
    })
}

fn column_mapping(section: &DatasetSection) -> Result<ColumnMapping, CliError> {
    let mut mapping = ColumnMapping::default();
    if let Some(c) = &section.class_column {
        mapping.class_column = c.clone();
    }
    if let Some(c) = &section.bug_column {
        mapping.bug_column = c.clone();
    }
    if let Some(c) = &section.version_column {
        mapping.version_column = (!c.is_empty()).then(|| c.clone());
    }
    for (id, column) in &section.columns {
        let kind: MetricKind = id.parse().map_err(CliError::input)?;
        mapping.set_metric_column(kind, column.clone());
    }
    Ok(mapping)
}

fn backend_config(
    file: BackendSection,
    flags: &Overrides,
    env: &dyn Fn(&str) -> Option<String>,
) -> Result<BackendConfig, CliError> {
    let defaults = BackendConfig::default();
    let mut config = BackendConfig {
        backend: file.backend.unwrap_or(defaults.backend),
        endpoint_url: file.endpoint_url.or_else(|| env(ENDPOINT_ENV)),
        model_name: file
            .model_name
            .or_else(|| env(MODEL_ENV))
            .unwrap_or(defaults.model_name),
        temperature: file.temperature.unwrap_or(defaults.temperature),
        max_retries: file.max_retries.unwrap_or(defaults.max_retries),
        request_timeout_secs: file
            .request_timeout_secs
            .unwrap_or(defaults.request_timeout_secs),
        max_parallel: file.max_parallel.unwrap_or(defaults.max_parallel),
        backoff_base_ms: file.backoff_base_ms.unwrap_or(defaults.backoff_base_ms),
        system_message: file.system_message.unwrap_or(defaults.system_message),
        api_key: env(API_KEY_ENV).filter(|k| !k.is_empty()),
    };
    if let Some(b) = flags.backend {
        config.backend = b;
    }
    if let Some(e) = &flags.endpoint {
        config.endpoint_url = Some(e.clone());
    }
    if let Some(m) = &flags.model {
        config.model_name = m.clone();
    }
    if let Some(t) = flags.temperature {
        config.temperature = t;
    }
    if let Some(r) = flags.max_retries {
        config.max_retries = r;
    }
    if let Some(p) = flags.max_parallel {
        config.max_parallel = p;
    }
    if flags.reproducible {
        if flags.backend.is_none() {
            config.backend = BackendKind::Offline;
        }
        config.temperature = 0.0;
    }
    config
        .validate()
        .map_err(|e| CliError::input(e.to_string()))?;
    Ok(config)
}

fn default_cache_dir(env: &dyn Fn(&str) -> Option<String>) -> PathBuf {
    if let Some(xdg) = env("XDG_CACHE_HOME").filter(|s| !s.is_empty()) {
        return PathBuf::from(xdg).join("riskexplain");
    }
    if let Some(home) = env("HOME").filter(|s| !s.is_empty()) {
        return PathBuf::from(home).join(".cache").join("riskexplain");
    }
    PathBuf::from(".riskexplain-cache")
}

const APACHE_PROJECTS: &[&str] = &[
    "ant", "camel", "ivy", "log4j", "lucene", "poi", "synapse", "velocity", "xalan", "xerces",
    "forrest", "tomcat",
];

/// Guesses `(project, version)` from a file name such as `camel-1.6.csv`
/// or `ant17.csv`. Well-known Apache projects get their full name.
pub fn infer_identity(path: &Path) -> (String, String) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (name, version) = split_version(&stem);
    let name = name.trim_matches(['-', '_', ' ']).to_string();
    if name.is_empty() {
        return (stem, version);
    }
    let lower = name.to_lowercase();
    let mut display: String = lower
        .split(['-', '_'])
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut cs = w.chars();
            cs.next()
                .map(|c| c.to_uppercase().chain(cs).collect::<String>())
                .unwrap_or_default()
        })
        .collect::<Vec<_>>()
        .join(" ");
    if APACHE_PROJECTS.contains(&lower.as_str()) {
        display = format!("Apache {display}");
    }
    (display, version)
}

fn split_version(stem: &str) -> (String, String) {
    if let Some((name, version)) = stem.rsplit_once(['-', '_']) {
        if version.starts_with(|c: char| c.is_ascii_digit())
            && version.chars().all(|c| c.is_ascii_digit() || c == '.')
        {
            return (name.to_string(), version.to_string());
        }
    }
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 && digits < stem.len() {
        let (name, number) = stem.split_at(stem.len() - digits);
        let version = if number.len() > 1 {
            format!("{}.{}", &number[..1], &number[1..])
        } else {
            number.to_string()
        };
        return (name.to_string(), version);
    }
    (stem.to_string(), String::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn identity_from_file_names() {
        assert_eq!(
            infer_identity(Path::new("data/camel-1.6.csv")),
            ("Apache Camel".into(), "1.6".into())
        );
        assert_eq!(
            infer_identity(Path::new("ant17.csv")),
            ("Apache Ant".into(), "1.7".into())
        );
        assert_eq!(
            infer_identity(Path::new("my_service.csv")),
            ("My Service".into(), "".into())
        );
        assert_eq!(
            infer_identity(Path::new("log4j-1.2.csv")),
            ("Apache Log4j".into(), "1.2".into())
        );
    }

    #[test]
    fn flags_beat_file_beats_env() {
        let file: FileConfig =
            toml::from_str("[backend]\nmodel_name = \"from-file\"\n[dataset]\nproject = \"P\"\n")
                .unwrap();
        let env = |k: &str| match k {
            MODEL_ENV => Some("from-env".to_string()),
            ENDPOINT_ENV => Some("http://env".to_string()),
            _ => None,
        };
        let rc = resolve(Path::new("x.csv"), file, &Overrides::default(), &env).unwrap();
        assert_eq!(rc.backend.model_name, "from-file");
        assert_eq!(rc.backend.endpoint_url.as_deref(), Some("http://env"));
        assert_eq!(rc.project_name, "P");

        let flags = Overrides {
            model: Some("from-flag".into()),
            project: Some("Q".into()),
            ..Overrides::default()
        };
        let rc = resolve(Path::new("x.csv"), FileConfig::default(), &flags, &env).unwrap();
        assert_eq!(rc.backend.model_name, "from-flag");
        assert_eq!(rc.project_name, "Q");
    }

    #[test]
    fn key_only_from_environment() {
        let err = toml::from_str::<FileConfig>("[backend]\napi_key = \"sk\"\n").unwrap_err();
        assert!(err.to_string().contains("api_key"));
        let env = |k: &str| (k == API_KEY_ENV).then(|| "sk-env".to_string());
        let rc = resolve(
            Path::new("x.csv"),
            FileConfig::default(),
            &Overrides::default(),
            &env,
        )
        .unwrap();
        assert_eq!(rc.backend.api_key.as_deref(), Some("sk-env"));
    }

    #[test]
    fn remote_without_key_is_an_input_error() {
        let flags = Overrides {
            backend: Some(BackendKind::Remote),
            endpoint: Some("http://localhost:1".into()),
            ..Overrides::default()
        };
        let err = resolve(Path::new("x.csv"), FileConfig::default(), &flags, &no_env).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains(API_KEY_ENV));
    }

    #[test]
    fn reproducible_defaults_to_offline_and_keeps_cache() {
        let flags = Overrides {
            reproducible: true,
            no_cache: true,
            ..Overrides::default()
        };
        let rc = resolve(Path::new("x.csv"), FileConfig::default(), &flags, &no_env).unwrap();
        assert_eq!(rc.backend.backend, BackendKind::Offline);
        assert_eq!(rc.backend.temperature, 0.0);
        assert!(rc.cache_dir.is_some());
    }

    #[test]
    fn column_overrides() {
        let file: FileConfig = toml::from_str(
            "[dataset]\nclass_column = \"class\"\nversion_column = \"\"\n[dataset.columns]\ncbo = \"CBO\"\nnoc = \"noc\"\n",
        )
        .unwrap();
        let rc = resolve(Path::new("x.csv"), file, &Overrides::default(), &no_env).unwrap();
        assert_eq!(rc.mapping.class_column, "class");
        assert_eq!(rc.mapping.version_column, None);
        assert!(rc
            .mapping
            .metrics
            .contains(&(MetricKind::Cbo, "CBO".into())));
        assert!(rc
            .mapping
            .metrics
            .contains(&(MetricKind::Other("noc".into()), "noc".into())));
    }
}
