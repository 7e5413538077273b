use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use super::ResultBundle;
use crate::calibration::PredictionRecord;
use crate::error::{Error, Result};

struct Line {
    record: PredictionRecord,
    model_id: Option<String>,
    lambda: Option<f64>,
}

fn parse_line(lineno: usize, text: &str) -> Result<Line> {
    let bad = |message: String| Error::MalformedLine { line: lineno, message };
    let obj: Map<String, Value> =
        serde_json::from_str(text).map_err(|e| bad(format!("not a JSON object: {e}")))?;

    let task = match obj.get("task") {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(bad("`task` must be a string".into())),
    };
    let sample_id = match obj.get("sample_id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) if n.is_u64() || n.is_i64() => n.to_string(),
        _ => return Err(bad("`sample_id` must be a string or integer".into())),
    };
    let confidence = obj
        .get("confidence")
        .and_then(Value::as_f64)
        .ok_or_else(|| bad("`confidence` must be a number".into()))?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(Error::ConfidenceOutOfRange {
            line: lineno,
            value: confidence,
        });
    }
    let correct = match obj.get("correct") {
        Some(Value::Bool(b)) => *b,
        Some(Value::Number(n)) if n.as_u64() == Some(0) => false,
        Some(Value::Number(n)) if n.as_u64() == Some(1) => true,
        _ => return Err(bad("`correct` must be a boolean".into())),
    };
    let model_id = match obj.get("model_id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(bad("`model_id` must be a string".into())),
    };
    let lambda = match obj.get("lambda") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_f64()
                .filter(|l| l.is_finite())
                .ok_or_else(|| bad("`lambda` must be a finite number".into()))?,
        ),
    };

    Ok(Line {
        record: PredictionRecord {
            task,
            sample_id,
            confidence,
            correct,
        },
        model_id,
        lambda,
    })
}

/// Parse a JSONL prediction log from any reader. Blank lines are skipped;
/// line numbers in errors are 1-based. `default_model_id` applies when no
/// line names a model.
pub fn parse_prediction_log_reader<R: BufRead>(reader: R, default_model_id: &str) -> Result<ResultBundle> {
    let mut bundle = ResultBundle::new(default_model_id, None);
    let mut model_seen: Option<String> = None;
    let mut lambda_seen: Option<(usize, Option<f64>)> = None;

    for (idx, raw) in reader.split(b'\n').enumerate() {
        let lineno = idx + 1;
        let raw = raw.map_err(|e| Error::MalformedLine {
            line: lineno,
            message: e.to_string(),
        })?;
        let text = std::str::from_utf8(&raw).map_err(|_| Error::MalformedLine {
            line: lineno,
            message: "not valid UTF-8".into(),
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let line = parse_line(lineno, text)?;

        if let Some(m) = line.model_id {
            match &model_seen {
                Some(prev) if *prev != m => {
                    return Err(Error::MalformedLine {
                        line: lineno,
                        message: format!("model_id `{m}` conflicts with `{prev}`"),
                    })
                }
                _ => model_seen = Some(m),
            }
        }
        match lambda_seen {
            Some((_, prev)) if prev != line.lambda => {
                return Err(Error::MalformedLine {
                    line: lineno,
                    message: "lambda differs from earlier lines".into(),
                })
            }
            None => lambda_seen = Some((lineno, line.lambda)),
            _ => {}
        }
        bundle.push_record(line.record);
    }

    if let Some(m) = model_seen {
        bundle.model_id = m;
    }
    bundle.lambda = lambda_seen.and_then(|(_, l)| l);
    Ok(bundle)
}

/// Parse a JSONL prediction log; the file stem is the fallback model id.
pub fn parse_prediction_log(path: impl AsRef<Path>) -> Result<ResultBundle> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_prediction_log_reader(BufReader::new(file), &stem)
}

pub fn write_prediction_log_to<W: Write>(bundle: &ResultBundle, mut out: W) -> Result<()> {
    for record in bundle.records.values().flatten() {
        let mut obj = Map::new();
        obj.insert("task".into(), Value::from(record.task.as_str()));
        obj.insert("sample_id".into(), Value::from(record.sample_id.as_str()));
        obj.insert("confidence".into(), Value::from(record.confidence));
        obj.insert("correct".into(), Value::from(record.correct));
        obj.insert("model_id".into(), Value::from(bundle.model_id.as_str()));
        if let Some(l) = bundle.lambda {
            obj.insert("lambda".into(), Value::from(l));
        }
        serde_json::to_writer(&mut out, &obj).map_err(|e| Error::Serialization(e.to_string()))?;
        out.write_all(b"\n")
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    Ok(())
}

pub fn write_prediction_log(bundle: &ResultBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_prediction_log_to(bundle, &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}
