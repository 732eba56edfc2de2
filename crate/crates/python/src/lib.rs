//! Python bindings: load datasets, inspect baselines and severity, compose
//! prompts, generate and validate explanations, and render reports.

use std::path::PathBuf;

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use riskexplain::backend::{
    build_backend, BackendConfig, BackendKind, GenerationRequest, API_KEY_ENV,
};
use riskexplain::contextualizer::assess_dataset;
use riskexplain::pipeline::{build_reports, explain_with_cache, select_records, top_k, RunOptions};
use riskexplain::report::{render_project_report, ReportFormat, ReportMode};
use riskexplain::{
    classify_severity, compose_prompt as compose, compute_baseline, dataset_summary,
    sigma_distance as distance, validate_with, ClassRiskProfile, ColumnMapping, MetricKind,
    ProjectBaseline, ProjectDataset, PromptConfig, SeverityThresholds, SigmaDistance,
};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializable Rust value to plain Python objects.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(module = "riskexplain", frozen)]
struct Dataset {
    inner: ProjectDataset,
    baseline: ProjectBaseline,
    profiles: Vec<ClassRiskProfile>,
}

impl Dataset {
    fn build(inner: ProjectDataset) -> PyResult<Self> {
        let baseline = compute_baseline(&inner, &inner.metric_kinds()).map_err(value_error)?;
        let profiles = assess_dataset(&inner, &baseline, &SeverityThresholds::default())
            .map_err(value_error)?;
        Ok(Dataset {
            inner,
            baseline,
            profiles,
        })
    }

    fn row(&self, selector: &str) -> PyResult<usize> {
        match select_records(&self.inner, selector).as_slice() {
            [row] => Ok(*row),
            [] => Err(PyKeyError::new_err(format!(
                "no class matches `{selector}`"
            ))),
            many => Err(PyKeyError::new_err(format!(
                "`{selector}` matches {} classes; use a more specific selector",
                many.len()
            ))),
        }
    }
}

#[pymethods]
impl Dataset {
    #[getter]
    fn project_name(&self) -> &str {
        &self.inner.project_name
    }

    #[getter]
    fn version(&self) -> &str {
        &self.inner.version
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({:?}, {} classes)",
            self.inner.label(),
            self.inner.records.len()
        )
    }

    fn class_names(&self) -> Vec<String> {
        self.inner
            .records
            .iter()
            .map(|r| r.class_name.clone())
            .collect()
    }

    /// Full class names matching a name, glob, or substring.
    fn select(&self, selector: &str) -> Vec<String> {
        select_records(&self.inner, selector)
            .into_iter()
            .map(|i| self.inner.records[i].class_name.clone())
            .collect()
    }

    /// `{"class_count", "buggy_count", "buggy_rate"}`.
    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &dataset_summary(&self.inner))
    }

    /// Metric id to `{"mean", "std_dev", "count", "min", "max"}`.
    fn baseline<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.baseline.metrics)
    }

    fn missing_cells<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.load_report.missing)
    }

    /// Severity profile for one class.
    fn profile<'py>(&self, py: Python<'py>, class_name: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.profiles[self.row(class_name)?])
    }

    /// Profiles of the `k` most severe classes.
    fn top<'py>(&self, py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &top_k(&self.profiles, k))
    }
}

#[pyfunction]
#[pyo3(signature = (path, project = None, version = None))]
fn load_dataset(
    path: PathBuf,
    project: Option<String>,
    version: Option<String>,
) -> PyResult<Dataset> {
    let project = project.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let ds = riskexplain::load_dataset(
        &path,
        &ColumnMapping::default(),
        &project,
        version.as_deref().unwrap_or(""),
    )
    .map_err(value_error)?;
    Dataset::build(ds)
}

/// Builds a dataset from CSV text in the default (PROMISE) layout.
#[pyfunction]
#[pyo3(signature = (text, project, version = None))]
fn read_csv(text: &str, project: &str, version: Option<String>) -> PyResult<Dataset> {
    let ds = riskexplain::read_dataset(
        text.as_bytes(),
        &ColumnMapping::default(),
        project,
        version.as_deref().unwrap_or(""),
    )
    .map_err(value_error)?;
    Dataset::build(ds)
}

/// Signed distance in standard deviations, or `None` when `std_dev` is 0.
#[pyfunction]
fn sigma_distance(value: f64, mean: f64, std_dev: f64) -> Option<f64> {
    distance(value, mean, std_dev).value()
}

/// Severity band name for a z value (`None` means no variance).
#[pyfunction]
fn classify(z: Option<f64>) -> &'static str {
    let d = match z {
        Some(z) => SigmaDistance { z, defined: true },
        None => SigmaDistance {
            z: 0.0,
            defined: false,
        },
    };
    classify_severity(d).as_str()
}

fn prompt_config(
    include_baseline: bool,
    audience: Option<String>,
    project_label: Option<String>,
) -> PromptConfig {
    let mut config = PromptConfig {
        include_baseline,
        project_label,
        ..PromptConfig::default()
    };
    if let Some(a) = audience {
        config.audience = a;
    }
    config
}

/// The four prompt components, the rendered text, and its fingerprint.
#[pyfunction]
#[pyo3(signature = (dataset, class_name, include_baseline = true, audience = None, project_label = None))]
fn compose_prompt<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    class_name: &str,
    include_baseline: bool,
    audience: Option<String>,
    project_label: Option<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let record = &dataset.inner.records[dataset.row(class_name)?];
    let config = prompt_config(include_baseline, audience, project_label);
    let bundle = compose(record, &dataset.baseline, &config).map_err(value_error)?;
    let out = to_py(py, &bundle)?;
    out.set_item("fingerprint", bundle.fingerprint())?;
    Ok(out)
}

fn backend_config(
    backend: &str,
    endpoint: Option<String>,
    model: Option<String>,
) -> PyResult<BackendConfig> {
    let mut config = BackendConfig {
        backend: backend.parse::<BackendKind>().map_err(value_error)?,
        endpoint_url: endpoint,
        api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
        ..BackendConfig::default()
    };
    if let Some(m) = model {
        config.model_name = m;
    }
    Ok(config)
}

/// Generates and validates an explanation for one class.
///
/// The remote backend reads its key from `RISKEXPLAIN_API_KEY`.
#[pyfunction]
#[pyo3(signature = (dataset, class_name, backend = "offline", endpoint = None, model = None, max_regenerations = 2))]
fn explain<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    class_name: &str,
    backend: &str,
    endpoint: Option<String>,
    model: Option<String>,
    max_regenerations: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let row = dataset.row(class_name)?;
    let config = backend_config(backend, endpoint, model)?;
    let backend = build_backend(&config).map_err(value_error)?;
    let prompt = compose(
        &dataset.inner.records[row],
        &dataset.baseline,
        &PromptConfig::default(),
    )
    .map_err(value_error)?;
    let request = GenerationRequest {
        prompt: &prompt,
        profile: &dataset.profiles[row],
        baseline: &dataset.baseline,
    };
    let cues = Default::default();
    let (explanation, coverage) = py
        .detach(|| explain_with_cache(backend.as_ref(), None, &request, max_regenerations, &cues))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(
        py,
        &serde_json::json!({"explanation": explanation, "coverage": coverage}),
    )
}

/// Taxonomy coverage of `text` as an explanation of one class.
#[pyfunction]
fn validate<'py>(
    py: Python<'py>,
    text: &str,
    dataset: &Dataset,
    class_name: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let profile = &dataset.profiles[dataset.row(class_name)?];
    to_py(py, &validate_with(text, profile, &Default::default()))
}

/// Project report rendered with the offline backend.
#[pyfunction]
#[pyo3(signature = (dataset, mode = "explained", format = "markdown", top = None))]
fn report(
    py: Python<'_>,
    dataset: &Dataset,
    mode: &str,
    format: &str,
    top: Option<usize>,
) -> PyResult<String> {
    let mode: ReportMode = mode.parse().map_err(value_error)?;
    let format: ReportFormat = format.parse().map_err(value_error)?;
    let profiles = match top {
        Some(k) => top_k(&dataset.profiles, k),
        None => dataset.profiles.clone(),
    };
    let options = RunOptions {
        mode,
        ..RunOptions::default()
    };
    Ok(py.detach(|| {
        let reports = build_reports(
            &dataset.inner,
            &dataset.baseline,
            &profiles,
            &riskexplain::OfflineBackend,
            None,
            &options,
            &|_| {},
        );
        render_project_report(&dataset.inner, &dataset.baseline, &reports, mode, format)
    }))
}

/// Core metric ids in prompt order.
#[pyfunction]
fn core_metrics() -> Vec<&'static str> {
    MetricKind::CORE.iter().map(|k| k.id()).collect()
}

#[pymodule(name = "riskexplain")]
fn riskexplain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(read_csv, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_distance, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(compose_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(explain, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(core_metrics, m)?)?;
    m.add("API_KEY_ENV", API_KEY_ENV)?;
    Ok(())
}
