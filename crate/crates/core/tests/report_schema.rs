use riskexplain::backend::offline_generate;
use riskexplain::contextualizer::assess_dataset;
use riskexplain::report::{
    render_class_report, render_project_report, ClassReport, ReportFormat, ReportMode,
};
use riskexplain::{compute_baseline, read_dataset, validate, ColumnMapping, MetricKind};

const CSV: &str = "name,version,name,wmc,cbo,rfc,lcom,bug\n\
camel,1.6,org.apache.camel.Exchange,26,448,26,325,7\n\
camel,1.6,org.apache.camel.Route,3,4,5,6,0\n\
camel,1.6,org.apache.camel.Same,3,4,5,6,1\n\
camel,1.6,org.apache.camel.Dirty,n/a,4,5,6,0\n";

fn validator() -> jsonschema::Validator {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../schemas/report.schema.json"
    );
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn reports(
    mode: ReportMode,
) -> (
    riskexplain::ProjectDataset,
    riskexplain::ProjectBaseline,
    Vec<ClassReport>,
) {
    let ds = read_dataset(
        CSV.as_bytes(),
        &ColumnMapping::default(),
        "Apache Camel",
        "",
    )
    .unwrap();
    let b = compute_baseline(&ds, &MetricKind::CORE).unwrap();
    let profiles = assess_dataset(&ds, &b, &Default::default()).unwrap();
    let reports = profiles
        .into_iter()
        .map(|p| {
            let mut r = ClassReport::metrics_only(ds.label(), p.clone());
            if mode == ReportMode::Explained {
                let e = offline_generate(&p, &b);
                r.coverage = Some(validate(&e.text, &p));
                r.prompt_fingerprint = Some(e.prompt_fingerprint.clone());
                r.explanation = Some(e);
            }
            r
        })
        .collect();
    (ds, b, reports)
}

fn assert_valid(v: &jsonschema::Validator, text: &str) {
    let instance: serde_json::Value = serde_json::from_str(text).unwrap();
    let errors: Vec<String> = v
        .iter_errors(&instance)
        .map(|e| format!("{e} at {}", e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn project_reports_match_schema_in_both_modes() {
    let v = validator();
    for mode in [ReportMode::MetricsOnly, ReportMode::Explained] {
        let (ds, b, reps) = reports(mode);
        let json = render_project_report(&ds, &b, &reps, mode, ReportFormat::Json);
        assert_valid(&v, &json);
    }
}

#[test]
fn class_reports_match_schema() {
    let v = validator();
    let (_, _, reps) = reports(ReportMode::Explained);
    for r in &reps {
        assert_valid(
            &v,
            &render_class_report(r, ReportMode::Explained, ReportFormat::Json),
        );
        assert_valid(
            &v,
            &render_class_report(r, ReportMode::MetricsOnly, ReportFormat::Json),
        );
    }
}

#[test]
fn schema_rejects_unknown_band() {
    let v = validator();
    let (ds, b, reps) = reports(ReportMode::MetricsOnly);
    let json = render_project_report(&ds, &b, &reps, ReportMode::MetricsOnly, ReportFormat::Json);
    let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
    value["classes"][0]["overall_band"] = "catastrophic".into();
    assert!(!v.is_valid(&value));
}

#[test]
fn rendered_json_round_trips_byte_identically() {
    let (ds, b, reps) = reports(ReportMode::Explained);
    let json = render_project_report(&ds, &b, &reps, ReportMode::Explained, ReportFormat::Json);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    let mut again = serde_json::to_string_pretty(&value).unwrap();
    again.push('\n');
    assert_eq!(again, json);
}
