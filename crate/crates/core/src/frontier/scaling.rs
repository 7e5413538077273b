use serde::{Deserialize, Serialize};

use super::{select_lambda_star, SweepPoint};
use crate::error::{Error, Result};

/// Denominator of the normalized accuracy curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Divide by the best accuracy in the sweep; values land in (0, 1].
    #[default]
    SweepMax,
    /// Divide by the IT parent's accuracy; values may exceed 1.
    ItAccuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStats {
    /// Best sweep accuracy minus IT accuracy, in percentage points.
    pub peak_gain: f64,
    /// 1 for a rise-then-fall (or monotone) curve, lower as it zig-zags.
    pub smoothness: f64,
    pub lambda_star: f64,
    pub normalized_curve: Vec<(f64, f64)>,
    pub normalization: Normalization,
}

const MIN_INTERIOR: usize = 3;

/// `1 - (TV - U) / 2`, clipped to [0, 1], where TV is the curve's total
/// variation and U = (max - first) + (max - last) is the variation of a
/// single-peaked curve with the same ends and peak.
///
/// (TV - U) / 2 equals the descents before the first maximum plus the ascents
/// after it; summing those directly keeps unimodal curves at exactly 1.
pub(crate) fn smoothness_of(curve: &[f64]) -> f64 {
    let Some(peak_at) = curve
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
    else {
        return 1.0;
    };
    let excess: f64 = curve
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            if i < peak_at {
                (w[0] - w[1]).max(0.0)
            } else {
                (w[1] - w[0]).max(0.0)
            }
        })
        .sum();
    (1.0 - excess).clamp(0.0, 1.0)
}

pub fn scaling_stats(sweep: &[SweepPoint], acc_task: &str, ece_task: &str) -> Result<ScalingStats> {
    scaling_stats_with(sweep, acc_task, ece_task, Normalization::SweepMax)
}

/// Scaling-panel statistics over the interpolation range lambda in [0, 1].
pub fn scaling_stats_with(
    sweep: &[SweepPoint],
    acc_task: &str,
    ece_task: &str,
    normalization: Normalization,
) -> Result<ScalingStats> {
    let mut points: Vec<&SweepPoint> = sweep
        .iter()
        .filter(|p| (0.0..=1.0).contains(&p.lambda))
        .collect();
    points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    if points.windows(2).any(|w| w[0].lambda == w[1].lambda) {
        return Err(Error::InvalidSweep("duplicate lambda in sweep".into()));
    }

    let has_parents = points.first().is_some_and(|p| p.lambda == 0.0)
        && points.last().is_some_and(|p| p.lambda == 1.0);
    let interior = points.len().saturating_sub(2);
    if !has_parents || interior < MIN_INTERIOR {
        return Err(Error::TooFewPoints {
            needed: MIN_INTERIOR,
            got: if has_parents { interior } else { 0 },
        });
    }

    let acc: Vec<f64> = points
        .iter()
        .map(|p| p.accuracy_for(acc_task))
        .collect::<Result<_>>()?;
    let peak = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let it_acc = *acc.last().unwrap();

    let denom = match normalization {
        Normalization::SweepMax => peak,
        Normalization::ItAccuracy => it_acc,
    };
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::InvalidSweep(format!(
            "cannot normalize by non-positive accuracy {denom}"
        )));
    }
    let normalized: Vec<f64> = acc.iter().map(|a| a / denom).collect();

    let owned: Vec<SweepPoint> = points.iter().map(|&p| p.clone()).collect();
    let star = select_lambda_star(&owned, acc_task, ece_task)?;

    Ok(ScalingStats {
        peak_gain: peak - it_acc,
        smoothness: smoothness_of(&normalized),
        lambda_star: star.lambda,
        normalized_curve: points.iter().map(|p| p.lambda).zip(normalized).collect(),
        normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(acc: &[f64]) -> Vec<SweepPoint> {
        let n = acc.len() - 1;
        acc.iter()
            .enumerate()
            .map(|(i, &a)| {
                let l = i as f64 / n as f64;
                SweepPoint::new(l, "m").with_task("t", a, Some(0.05 + 0.5 * l))
            })
            .collect()
    }

    #[test]
    fn concave_curve_peaking_at_point_four() {
        let grid: Vec<f64> = (0..=10).map(|i| 50.0 - 30.0 * (i as f64 / 10.0 - 0.4).powi(2)).collect();
        let s = scaling_stats(&sweep(&grid), "t", "t").unwrap();
        assert_eq!(s.lambda_star, 0.4);
        assert_eq!(s.smoothness, 1.0);
        assert!((s.peak_gain - (50.0 - grid[10])).abs() < 1e-12);
        assert!(s.normalized_curve.iter().all(|&(_, v)| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn flat_curve() {
        let s = scaling_stats(&sweep(&[40.0; 6]), "t", "t").unwrap();
        assert_eq!(s.peak_gain, 0.0);
        assert_eq!(s.smoothness, 1.0);
        assert_eq!(s.lambda_star, 0.0);
    }

    #[test]
    fn monotone_curve_is_smooth() {
        assert_eq!(smoothness_of(&[0.5, 0.6, 0.8, 1.0]), 1.0);
        assert_eq!(smoothness_of(&[1.0, 0.9, 0.2]), 1.0);
    }

    #[test]
    fn needs_parents_and_interior() {
        assert!(matches!(
            scaling_stats(&sweep(&[1.0, 2.0, 3.0, 4.0]), "t", "t"),
            Err(Error::TooFewPoints { got: 2, .. })
        ));
        let mut s = sweep(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        s.pop();
        assert!(matches!(scaling_stats(&s, "t", "t"), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn it_normalization() {
        let s = scaling_stats_with(&sweep(&[40.0, 50.0, 45.0, 42.0, 40.0]), "t", "t", Normalization::ItAccuracy)
            .unwrap();
        assert_eq!(s.normalized_curve[1].1, 1.25);
        assert_eq!(s.normalized_curve[4].1, 1.0);
    }
}
