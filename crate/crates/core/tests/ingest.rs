mod common;

use frontier_merge::calibration::{compute_ece, PredictionRecord};
use frontier_merge::eval_ingest::{
    bundles_to_points, generate_synthetic, parse_prediction_log, parse_prediction_log_reader, parse_summary_reader,
    write_prediction_log, write_prediction_log_to, write_summary_to, CalibrationMap, ConfidenceLaw, ResultBundle,
    SyntheticSpec, TaskSummary,
};
use frontier_merge::Error;
use proptest::prelude::*;

fn task_name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["bbh", "gpqa", "mmlu_pro", "odd \"task\", x"]).prop_map(String::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_round_trip(
        rows in prop::collection::vec((task_name(), "[a-z0-9]{1,8}", 0.0f64..=1.0, any::<bool>()), 1..50),
        lambda in prop::option::of(0.0f64..3.0),
    ) {
        let mut b = ResultBundle::new("model-x", lambda);
        for (task, id, c, ok) in rows {
            b.push_record(PredictionRecord::new(task, id, c, ok).unwrap());
        }
        let mut buf = Vec::new();
        write_prediction_log_to(&b, &mut buf).unwrap();
        let back = parse_prediction_log_reader(&buf[..], "ignored").unwrap();
        prop_assert_eq!(back, b);
    }

    #[test]
    fn summary_round_trip(
        rows in prop::collection::vec((0u8..4, 0u8..5, task_name(), 0.0f64..=100.0, prop::option::of(0.0f64..=1.0)), 1..40),
    ) {
        let mut bundles: Vec<ResultBundle> = Vec::new();
        for (m, l, task, acc, ece) in rows {
            let (id, lambda) = (format!("m{m}"), Some(l as f64 / 4.0));
            let pos = match bundles.iter().position(|b| b.model_id == id && b.lambda == lambda) {
                Some(p) => p,
                None => { bundles.push(ResultBundle::new(id, lambda)); bundles.len() - 1 }
            };
            bundles[pos].summaries.insert(task, TaskSummary { accuracy: acc, ece });
        }
        let mut buf = Vec::new();
        write_summary_to(&bundles, &mut buf).unwrap();
        let back = parse_summary_reader(&buf[..]).unwrap();
        prop_assert_eq!(back, bundles);
    }

    #[test]
    fn jsonl_parser_is_total(text in ".{0,200}") {
        let _ = parse_prediction_log_reader(text.as_bytes(), "m");
    }
}

#[test]
fn jsonl_line_numbers_and_codes() {
    let text = "{\"task\":\"a\",\"sample_id\":1,\"confidence\":0.5,\"correct\":true}\n\n{\"task\":\"a\",\"sample_id\":2,\"confidence\":1.5,\"correct\":0}\n";
    match parse_prediction_log_reader(text.as_bytes(), "m") {
        Err(Error::ConfidenceOutOfRange { line: 3, value }) => assert_eq!(value, 1.5),
        other => panic!("{other:?}"),
    }
    let err = parse_prediction_log_reader(&b"{\"task\": 3}\n"[..], "m").unwrap_err();
    assert_eq!(err.code(), "MALFORMED_LINE");
    let err = parse_prediction_log_reader(&b"\xff\xfe\n"[..], "m").unwrap_err();
    assert_eq!(err.code(), "MALFORMED_LINE");
}

#[test]
fn log_file_becomes_sweep_point() {
    let dir = tempfile::tempdir().unwrap();
    let mut b = ResultBundle::new("ta-0.5", Some(0.5));
    for (i, (c, ok)) in [(0.95, true), (0.95, false), (0.55, true), (0.55, true)].into_iter().enumerate() {
        b.push_record(PredictionRecord::new("mmlu_pro", i.to_string(), c, ok).unwrap());
    }
    let path = dir.path().join("log.jsonl");
    write_prediction_log(&b, &path).unwrap();
    let parsed = parse_prediction_log(&path).unwrap();
    let p = &bundles_to_points(&[parsed], 10).unwrap()[0];
    assert_eq!(p.lambda, 0.5);
    assert_eq!(p.accuracy["mmlu_pro"], 75.0);
    assert!((p.ece["mmlu_pro"] - 0.45).abs() < 1e-12);
}

#[test]
fn inconsistent_summary_is_rejected() {
    let mut b = ResultBundle::new("m", Some(1.0));
    b.push_record(PredictionRecord::new("t", "0", 0.9, true).unwrap());
    b.push_record(PredictionRecord::new("t", "1", 0.9, false).unwrap());
    assert!(b.insert_summary("t", TaskSummary { accuracy: 50.0, ece: None }).is_ok());
    let err = b.insert_summary("t", TaskSummary { accuracy: 60.0, ece: None }).unwrap_err();
    assert_eq!(err.code(), "INCONSISTENT_BUNDLE");
}

#[test]
fn synthetic_is_reproducible() {
    let spec = SyntheticSpec::new(1000, ConfidenceLaw::Uniform { low: 0.2, high: 0.9 }, CalibrationMap::Identity, 11);
    assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
    let other = SyntheticSpec { seed: 12, ..spec.clone() };
    assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    let empty = SyntheticSpec { n: 0, ..spec };
    assert_eq!(generate_synthetic(&empty).unwrap().record_count(), 0);
}

#[test]
fn calibrated_source_has_small_ece() {
    let spec = SyntheticSpec::new(100_000, ConfidenceLaw::Uniform { low: 0.0, high: 1.0 }, CalibrationMap::Identity, 3);
    let b = generate_synthetic(&spec).unwrap();
    let r = compute_ece(&b.records["synthetic"], 10).unwrap();
    assert!(r.ece < 0.01, "{}", r.ece);
}

#[test]
fn confidence_inflation_gap() {
    let spec = SyntheticSpec::new(100_000, ConfidenceLaw::PointMass(0.95), CalibrationMap::Constant(0.40), 5);
    let b = generate_synthetic(&spec).unwrap();
    let r = compute_ece(&b.records["synthetic"], 10).unwrap();
    assert!((r.mean_confidence - 0.95).abs() < 1e-12);
    assert!((r.ece - 0.55).abs() < 0.02, "{}", r.ece);
}
