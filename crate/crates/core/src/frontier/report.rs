use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::{DegradationReport, ParetoResult, ScalingStats, SweepPoint};
use crate::error::{Error, Result};

pub const FRONTIER_CSV_HEADER: &str = "lambda,model_id,task,accuracy,ece,on_frontier,is_lambda_star";

/// A two-column data series for an external plotting tool.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSeries {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl PlotSeries {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.x_label, self.y_label);
        for (x, y) in &self.points {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }
}

fn task_label(result: &ParetoResult) -> String {
    if result.acc_task == result.ece_task {
        result.acc_task.clone()
    } else {
        format!("{}|{}", result.acc_task, result.ece_task)
    }
}

fn is_star(p: &SweepPoint, star: Option<&SweepPoint>) -> bool {
    star.is_some_and(|s| s.lambda == p.lambda && s.model_id == p.model_id)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// One row per sweep point, in lambda order.
pub fn frontier_csv(result: &ParetoResult, star: Option<&SweepPoint>) -> String {
    let task = csv_field(&task_label(result));
    let mut order: Vec<usize> = (0..result.points.len()).collect();
    order.sort_by(|&a, &b| result.points[a].lambda.total_cmp(&result.points[b].lambda).then(a.cmp(&b)));

    let mut out = String::from(FRONTIER_CSV_HEADER);
    out.push('\n');
    for idx in order {
        let p = &result.points[idx];
        let (acc, ece) = p.axes(&result.acc_task, &result.ece_task).expect("classified point");
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.lambda,
            csv_field(&p.model_id),
            task,
            acc,
            ece,
            result.is_on_frontier(idx),
            is_star(p, star)
        ));
    }
    out
}

pub fn frontier_json(result: &ParetoResult, star: Option<&SweepPoint>) -> serde_json::Value {
    let rows: Vec<_> = result
        .points
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let (acc, ece) = p.axes(&result.acc_task, &result.ece_task).expect("classified point");
            json!({
                "lambda": p.lambda,
                "model_id": p.model_id,
                "origin": p.origin,
                "accuracy": acc,
                "ece": ece,
                "on_frontier": result.is_on_frontier(idx),
                "dominated_by": result.dominated_by.get(&idx).map(|&w| result.points[w].lambda),
                "is_lambda_star": is_star(p, star),
            })
        })
        .collect();
    json!({
        "acc_task": result.acc_task,
        "ece_task": result.ece_task,
        "lambda_star": star.map(|s| s.lambda),
        "points": rows,
    })
}

/// Accuracy vs lambda, ECE vs lambda, and the (ECE, accuracy) path in lambda order.
pub fn plot_series(result: &ParetoResult) -> Vec<PlotSeries> {
    let mut pts: Vec<(f64, f64, f64)> = result
        .points
        .iter()
        .map(|p| {
            let (a, e) = p.axes(&result.acc_task, &result.ece_task).expect("classified point");
            (p.lambda, a, e)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    vec![
        PlotSeries {
            name: "accuracy_vs_lambda".into(),
            x_label: "lambda".into(),
            y_label: "accuracy".into(),
            points: pts.iter().map(|&(l, a, _)| (l, a)).collect(),
        },
        PlotSeries {
            name: "ece_vs_lambda".into(),
            x_label: "lambda".into(),
            y_label: "ece".into(),
            points: pts.iter().map(|&(l, _, e)| (l, e)).collect(),
        },
        PlotSeries {
            name: "accuracy_vs_ece".into(),
            x_label: "ece".into(),
            y_label: "accuracy".into(),
            points: pts.iter().map(|&(_, a, e)| (e, a)).collect(),
        },
    ]
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn pretty(value: &impl Serialize) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Serialization(e.to_string()))
}

/// Write every frontier artifact into `dir`; returns the paths written.
///
/// `format` selects `pareto.csv` or `pareto.json`; the other artifacts are
/// always JSON (structured) or CSV (plot series).
pub fn write_frontier_report(
    dir: &Path,
    result: &ParetoResult,
    star: Option<&SweepPoint>,
    scaling: Option<&ScalingStats>,
    degradation: &[DegradationReport],
    as_json: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if as_json {
        written.push(write(dir.join("pareto.json"), pretty(&frontier_json(result, star))?)?);
    } else {
        written.push(write(dir.join("pareto.csv"), frontier_csv(result, star))?);
    }
    if let Some(stats) = scaling {
        written.push(write(dir.join("scaling.json"), pretty(stats)?)?);
    }
    if !degradation.is_empty() {
        written.push(write(dir.join("degradation.json"), pretty(&degradation)?)?);
    }
    let plots = dir.join("plots");
    fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    for series in plot_series(result) {
        written.push(write(plots.join(format!("{}.csv", series.name)), series.to_csv())?);
    }
    if let Some(stats) = scaling {
        let series = PlotSeries {
            name: "normalized_accuracy_vs_lambda".into(),
            x_label: "lambda".into(),
            y_label: "normalized_accuracy".into(),
            points: stats.normalized_curve.clone(),
        };
        written.push(write(plots.join(format!("{}.csv", series.name)), series.to_csv())?);
    }
    Ok(written)
}
