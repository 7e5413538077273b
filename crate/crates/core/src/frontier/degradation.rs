use serde::{Deserialize, Serialize};

use super::SweepPoint;

/// Step tolerance for monotonicity checks, in the units of the series.
pub const DEFAULT_TOLERANCE: f64 = 0.5;

/// Slack for decimal inputs that are not exact in binary (0.670 - 0.659 is
/// slightly above 0.011 as f64).
const REPRESENTATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationReport {
    pub task: String,
    pub tolerance: f64,
    /// Extrapolated lambdas (> 1) examined, ascending.
    pub lambdas: Vec<f64>,
    pub accuracy: Vec<f64>,
    /// Present only when every extrapolated point reports ECE for the task.
    pub ece: Option<Vec<f64>>,
    /// Accuracy never rises by more than the tolerance and ends lower than it starts.
    pub accuracy_declining: bool,
    /// ECE never falls by more than the tolerance and ends higher than it starts.
    pub ece_rising: Option<bool>,
    /// Accuracy declines and, where ECE is reported, ECE rises.
    pub flagged: bool,
    /// Accuracy of the lambda = 1 point, if the input has one.
    pub reference_accuracy: Option<f64>,
    /// First extrapolated lambda whose accuracy drops below half the reference.
    pub half_crossing_lambda: Option<f64>,
}

fn non_increasing(series: &[f64], tolerance: f64) -> bool {
    series
        .windows(2)
        .all(|w| w[1] - w[0] <= tolerance + REPRESENTATION_SLACK)
        && series.last() < series.first()
}

fn non_decreasing(series: &[f64], tolerance: f64) -> bool {
    series
        .windows(2)
        .all(|w| w[0] - w[1] <= tolerance + REPRESENTATION_SLACK)
        && series.last() > series.first()
}

/// Check whether extrapolating past the IT model (lambda > 1) degrades `task`
/// monotonically. Returns `None` when no point has lambda > 1 and accuracy
/// for the task.
pub fn detect_degradation(
    points: &[SweepPoint],
    task: &str,
    tolerance: f64,
) -> Option<DegradationReport> {
    let mut amplified: Vec<&SweepPoint> = points
        .iter()
        .filter(|p| p.lambda > 1.0 && p.accuracy.contains_key(task))
        .collect();
    if amplified.is_empty() {
        return None;
    }
    amplified.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    let lambdas: Vec<f64> = amplified.iter().map(|p| p.lambda).collect();
    let accuracy: Vec<f64> = amplified.iter().map(|p| p.accuracy[task]).collect();
    let ece: Option<Vec<f64>> = amplified.iter().map(|p| p.ece.get(task).copied()).collect();

    let accuracy_declining = non_increasing(&accuracy, tolerance);
    let ece_rising = ece.as_deref().map(|e| non_decreasing(e, tolerance));
    let reference_accuracy = points
        .iter()
        .find(|p| p.lambda == 1.0)
        .and_then(|p| p.accuracy.get(task).copied());
    let half_crossing_lambda = reference_accuracy.and_then(|r| {
        lambdas
            .iter()
            .zip(&accuracy)
            .find(|&(_, &a)| a < 0.5 * r)
            .map(|(&l, _)| l)
    });

    Some(DegradationReport {
        task: task.to_owned(),
        tolerance,
        lambdas,
        accuracy,
        flagged: accuracy_declining && ece_rising.unwrap_or(true),
        ece,
        accuracy_declining,
        ece_rising,
        reference_accuracy,
        half_crossing_lambda,
    })
}
