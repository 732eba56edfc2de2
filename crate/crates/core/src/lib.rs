//! Project-contextualized risk explanations for class-level software metrics.
//!
//! The pipeline loads a per-class metrics table, computes per-project
//! baseline statistics, places each class value on a sigma-distance severity
//! scale, composes a structured prompt, obtains an explanation from a remote
//! or offline backend, and checks the explanation for descriptive,
//! contextual and actionable content.

pub mod backend;
pub mod baseline;
pub mod contextualizer;
pub mod dataset;
pub mod metric;
pub mod pipeline;
pub mod prompt;
pub mod report;
pub mod taxonomy;

pub use backend::{
    build_backend, generate, BackendConfig, BackendError, BackendKind, Explanation,
    ExplanationBackend, GenerationRequest, OfflineBackend, RemoteBackend, ResponseCache,
    API_KEY_ENV,
};
pub use baseline::{
    compute_baseline, sigma_distance, BaselineError, MetricStats, ProjectBaseline, SigmaDistance,
};
pub use contextualizer::{
    assess_class, assess_dataset, classify_severity, ClassRiskProfile, ContextError,
    ContextualAssessment, SeverityBand, SeverityThresholds,
};
pub use dataset::{
    dataset_summary, load_dataset, read_dataset, ClassRecord, ColumnMapping, DatasetError,
    DatasetSummary, ProjectDataset,
};
pub use metric::MetricKind;
pub use prompt::{compose_prompt, PromptBundle, PromptConfig, PromptError};
pub use report::{
    render_class_report, render_project_report, ClassReport, ReportFormat, ReportMode,
};
pub use taxonomy::{validate, validate_with, TaxonomyCoverage, TaxonomyCues};
