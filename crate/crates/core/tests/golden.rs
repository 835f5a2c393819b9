//! Stored records of every released schema still parse, and re-running
//! their config echo reproduces them.

use dirac_lab::experiment::{run_experiment, ExperimentRecord, Pipeline, RECORD_SCHEMA};

const GOLDEN_V1: &str = include_str!("golden/record_v1.jsonl");

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn v1_record_parses_and_reproduces() {
    let record = ExperimentRecord::from_json_line(GOLDEN_V1.trim()).unwrap();
    assert_eq!(record.schema, RECORD_SCHEMA);
    assert!(record.violations.is_empty());
    let pipeline = Pipeline {
        series: record.points.iter().any(|p| p.series.is_some()),
        audit: record.points.iter().any(|p| p.audit.is_some()),
    };
    let again = run_experiment(&record.config, pipeline).unwrap();
    assert_eq!(again.metadata.scheme, record.metadata.scheme);
    assert!(close(again.metadata.xi_r, record.metadata.xi_r, 1e-12));
    assert!(close(again.threshold.f_star, record.threshold.f_star, 1e-10));
    assert_eq!(again.points.len(), record.points.len());
    for (a, b) in again.points.iter().zip(&record.points) {
        let (da, db) = (&a.decomposition, &b.decomposition);
        assert!(close(da.f, db.f, 1e-10));
        assert!(close(da.formula_total, db.formula_total, 1e-9));
        assert!(close(da.direct_total, db.direct_total, 1e-9));
        assert!(close(da.schrodinger_total, db.schrodinger_total, 1e-8));
    }
}

#[test]
fn unknown_schema_is_refused() {
    let line = GOLDEN_V1.trim().replacen(RECORD_SCHEMA, "dirac-lab/record/v0", 1);
    assert!(ExperimentRecord::from_json_line(&line).is_err());
}
