//! File-based boundary to external evaluation harnesses: per-sample JSONL
//! prediction logs, per-model CSV summary tables, and a synthetic record
//! generator for tests.
//!
//! Units are fixed per field: accuracy is a percentage in [0, 100], ECE a
//! fraction in [0, 1], confidence a probability in [0, 1].

mod jsonl;
mod summary;
mod synthetic;

pub use jsonl::{
    parse_prediction_log, parse_prediction_log_reader, write_prediction_log,
    write_prediction_log_to,
};
pub use summary::{
    parse_summary_reader, parse_summary_table, write_summary_table, write_summary_to,
    SUMMARY_COLUMNS,
};
pub use synthetic::{generate_synthetic, CalibrationMap, ConfidenceLaw, SyntheticSpec};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calibration::{compute_ece, CalibrationReport, PredictionRecord};
use crate::error::{Error, Result};
use crate::frontier::SweepPoint;

/// Largest disagreement, in accuracy points, tolerated between a summary row
/// and the records it summarizes.
pub const CONSISTENCY_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    /// Percent correct.
    pub accuracy: f64,
    pub ece: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultBundle {
    pub model_id: String,
    pub lambda: Option<f64>,
    pub records: BTreeMap<String, Vec<PredictionRecord>>,
    pub summaries: BTreeMap<String, TaskSummary>,
}

impl ResultBundle {
    pub fn new(model_id: impl Into<String>, lambda: Option<f64>) -> Self {
        Self {
            model_id: model_id.into(),
            lambda,
            ..Self::default()
        }
    }

    pub fn record_count(&self) -> usize {
        self.records.values().map(Vec::len).sum()
    }

    pub fn push_record(&mut self, record: PredictionRecord) {
        self.records.entry(record.task.clone()).or_default().push(record);
    }

    /// Attach a summary row, checking it against any records for the task.
    pub fn insert_summary(&mut self, task: &str, summary: TaskSummary) -> Result<()> {
        self.check_task(task, &summary)?;
        self.summaries.insert(task.to_owned(), summary);
        Ok(())
    }

    fn check_task(&self, task: &str, summary: &TaskSummary) -> Result<()> {
        let Some(records) = self.records.get(task).filter(|r| !r.is_empty()) else {
            return Ok(());
        };
        let correct = records.iter().filter(|r| r.correct).count();
        let from_records = 100.0 * correct as f64 / records.len() as f64;
        if (from_records - summary.accuracy).abs() > CONSISTENCY_TOLERANCE {
            return Err(Error::InconsistentBundle {
                model_id: self.model_id.clone(),
                task: task.to_owned(),
                from_records,
                from_summary: summary.accuracy,
            });
        }
        Ok(())
    }

    /// Records-vs-summaries cross-check over every task.
    pub fn validate(&self) -> Result<()> {
        self.summaries
            .iter()
            .try_for_each(|(task, s)| self.check_task(task, s))
    }

    /// Calibration reports for every task with records, in task order.
    pub fn calibration(&self, bin_count: usize) -> Result<Vec<CalibrationReport>> {
        self.records
            .values()
            .filter(|r| !r.is_empty())
            .map(|r| compute_ece(r, bin_count))
            .collect()
    }

    /// Collapse into a sweep point. Summaries win; tasks known only through
    /// records are scored with `bin_count` equal-width bins.
    pub fn to_sweep_point(&self, bin_count: usize) -> Result<SweepPoint> {
        let lambda = self.lambda.ok_or_else(|| {
            Error::InvalidSweep(format!("bundle `{}` has no lambda", self.model_id))
        })?;
        let mut point = SweepPoint::new(lambda, self.model_id.clone());
        for report in self.calibration(bin_count)? {
            point = point.with_task(&report.task, 100.0 * report.accuracy, Some(report.ece));
        }
        for (task, s) in &self.summaries {
            point.ece.remove(task);
            point = point.with_task(task, s.accuracy, s.ece);
        }
        Ok(point)
    }
}

/// Sweep points from bundles, one per bundle.
pub fn bundles_to_points(bundles: &[ResultBundle], bin_count: usize) -> Result<Vec<SweepPoint>> {
    bundles.iter().map(|b| b.to_sweep_point(bin_count)).collect()
}
