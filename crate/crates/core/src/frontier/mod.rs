//! The alignment-calibration frontier: Pareto classification of a merge sweep,
//! sweet-spot selection, scaling statistics and extrapolation degradation.

mod degradation;
mod pareto;
mod report;
mod scaling;

pub use degradation::{detect_degradation, DegradationReport, DEFAULT_TOLERANCE};
pub use pareto::{dominates, pareto_classify, select_lambda_star, ParetoResult};
pub use report::{
    frontier_csv, frontier_json, plot_series, write_frontier_report, PlotSeries, FRONTIER_CSV_HEADER,
};
pub use scaling::{scaling_stats, scaling_stats_with, Normalization, ScalingStats};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Pt,
    It,
    Merged,
}

impl Origin {
    pub fn for_lambda(lambda: f64) -> Self {
        if lambda == 0.0 {
            Origin::Pt
        } else if lambda == 1.0 {
            Origin::It
        } else {
            Origin::Merged
        }
    }
}

/// One evaluated model of a sweep. Accuracy in percent, ECE in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub model_id: String,
    pub accuracy: BTreeMap<String, f64>,
    pub ece: BTreeMap<String, f64>,
    pub origin: Origin,
}

impl SweepPoint {
    pub fn new(lambda: f64, model_id: impl Into<String>) -> Self {
        Self {
            lambda,
            model_id: model_id.into(),
            accuracy: BTreeMap::new(),
            ece: BTreeMap::new(),
            origin: Origin::for_lambda(lambda),
        }
    }

    pub fn with_task(mut self, task: &str, accuracy: f64, ece: Option<f64>) -> Self {
        self.accuracy.insert(task.to_owned(), accuracy);
        if let Some(e) = ece {
            self.ece.insert(task.to_owned(), e);
        }
        self
    }

    pub fn accuracy_for(&self, task: &str) -> Result<f64> {
        self.accuracy.get(task).copied().ok_or_else(|| Error::MissingTask {
            lambda: self.lambda,
            task: task.to_owned(),
        })
    }

    pub fn ece_for(&self, task: &str) -> Result<f64> {
        self.ece.get(task).copied().ok_or_else(|| Error::MissingTask {
            lambda: self.lambda,
            task: task.to_owned(),
        })
    }

    /// (accuracy on `acc_task`, ECE on `ece_task`).
    pub fn axes(&self, acc_task: &str, ece_task: &str) -> Result<(f64, f64)> {
        let pair = (self.accuracy_for(acc_task)?, self.ece_for(ece_task)?);
        if pair.0.is_nan() || pair.1.is_nan() {
            return Err(Error::InvalidSweep(format!(
                "NaN objective at lambda {}",
                self.lambda
            )));
        }
        Ok(pair)
    }
}
