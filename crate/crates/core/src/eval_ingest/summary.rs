use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::Deserialize;

use super::{ResultBundle, TaskSummary};
use crate::error::{Error, Result};

pub const SUMMARY_COLUMNS: [&str; 5] = ["model_id", "lambda", "task", "accuracy", "ece"];

#[derive(Debug, Deserialize)]
struct Row {
    model_id: String,
    lambda: Option<f64>,
    task: String,
    accuracy: f64,
    ece: Option<f64>,
}

/// Parse a summary table from any reader. Row numbers in errors count the
/// header as row 1.
pub fn parse_summary_reader<R: Read>(reader: R) -> Result<Vec<ResultBundle>> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::MalformedRow { row: 1, message: e.to_string() })?
        .clone();
    if let Some(missing) = SUMMARY_COLUMNS.iter().find(|c| !headers.iter().any(|h| h == **c)) {
        return Err(Error::MalformedRow {
            row: 1,
            message: format!("missing column `{missing}`"),
        });
    }

    let mut bundles: IndexMap<(String, Option<u64>), ResultBundle> = IndexMap::new();
    let mut seen = HashSet::new();
    for (idx, row) in csv.deserialize::<Row>().enumerate() {
        let rowno = idx + 2;
        let bad = |message: String| Error::MalformedRow { row: rowno, message };
        let row = row.map_err(|e| bad(e.to_string()))?;

        if row.lambda.is_some_and(|l| !l.is_finite()) {
            return Err(bad("lambda must be finite".into()));
        }
        if !(0.0..=100.0).contains(&row.accuracy) {
            return Err(bad(format!("accuracy {} outside [0, 100] percent", row.accuracy)));
        }
        if let Some(e) = row.ece.filter(|e| !(0.0..=1.0).contains(e)) {
            return Err(bad(format!("ece {e} outside [0, 1]")));
        }

        let lambda_key = row.lambda.map(f64::to_bits);
        if !seen.insert((row.model_id.clone(), lambda_key, row.task.clone())) {
            return Err(Error::DuplicateKey {
                model_id: row.model_id,
                lambda: row.lambda.unwrap_or(f64::NAN),
                task: row.task,
            });
        }
        bundles
            .entry((row.model_id.clone(), lambda_key))
            .or_insert_with(|| ResultBundle::new(row.model_id.clone(), row.lambda))
            .summaries
            .insert(
                row.task,
                TaskSummary {
                    accuracy: row.accuracy,
                    ece: row.ece,
                },
            );
    }
    Ok(bundles.into_values().collect())
}

/// One bundle per (model_id, lambda), in order of first appearance.
pub fn parse_summary_table(path: impl AsRef<Path>) -> Result<Vec<ResultBundle>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_summary_reader(file)
}

pub fn write_summary_to<W: Write>(bundles: &[ResultBundle], out: W) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS).map_err(ser)?;
    for b in bundles {
        for (task, s) in &b.summaries {
            w.write_record([
                b.model_id.clone(),
                b.lambda.map(|l| l.to_string()).unwrap_or_default(),
                task.clone(),
                s.accuracy.to_string(),
                s.ece.map(|e| e.to_string()).unwrap_or_default(),
            ])
            .map_err(ser)?;
        }
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn write_summary_table(bundles: &[ResultBundle], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_summary_to(bundles, file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let b = parse_summary_reader(
            "model_id,lambda,task,accuracy,ece\ngemma-3-12b-pt,0.0,mmlu_pro,42.35,0.024\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].lambda, Some(0.0));
        assert_eq!(b[0].summaries["mmlu_pro"], TaskSummary { accuracy: 42.35, ece: Some(0.024) });
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse_summary_reader("model_id,lambda,task,accuracy,ece\n".as_bytes())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn missing_ece_allowed() {
        let b = parse_summary_reader("model_id,lambda,task,accuracy,ece\nm,1.1,ifeval,75.42,\n".as_bytes()).unwrap();
        assert_eq!(b[0].summaries["ifeval"].ece, None);
    }

    #[test]
    fn errors() {
        let dup = "model_id,lambda,task,accuracy,ece\nm,0.5,t,1,0.1\nm,0.5,t,2,0.1\n";
        assert!(matches!(parse_summary_reader(dup.as_bytes()), Err(Error::DuplicateKey { .. })));
        for (text, row) in [
            ("model_id,lambda,task,accuracy,ece\nm,0.5,t,abc,0.1\n", 2),
            ("model_id,lambda,task,accuracy,ece\nm,0.5,t,1,0.1\nm,0.6,t,0.4,1.5\n", 3),
            ("model_id,lambda,task,accuracy,ece\nm,0.5,t,140,0.1\n", 2),
            ("model_id,lambda,task,accuracy\nm,0.5,t,1\n", 1),
        ] {
            match parse_summary_reader(text.as_bytes()) {
                Err(Error::MalformedRow { row: r, .. }) => assert_eq!(r, row, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
