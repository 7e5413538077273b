//! Accuracy, mean confidence and Expected Calibration Error over per-sample
//! prediction records, with equal-width reliability bins.
//!
//! Sums are taken over confidences sorted within each bin, so every statistic
//! is independent of record order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BIN_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub task: String,
    pub sample_id: String,
    /// Probability assigned to the predicted answer.
    pub confidence: f64,
    pub correct: bool,
}

impl PredictionRecord {
    pub fn new(
        task: impl Into<String>,
        sample_id: impl Into<String>,
        confidence: f64,
        correct: bool,
    ) -> Result<Self> {
        check_confidence(confidence)?;
        Ok(Self {
            task: task.into(),
            sample_id: sample_id.into(),
            confidence,
            correct,
        })
    }
}

fn check_confidence(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidConfidence { value })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStat {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
    /// `|accuracy - mean_confidence|`, 0 for empty bins.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub task: String,
    pub n: usize,
    /// Fraction correct in [0, 1].
    pub accuracy: f64,
    pub mean_confidence: f64,
    pub ece: f64,
    pub bins: Vec<BinStat>,
    pub bin_count: usize,
}

/// Bin index for confidence `c`: `floor(c * bins)`, with `c = 1` in the top bin.
pub fn bin_index(confidence: f64, bin_count: usize) -> usize {
    ((confidence * bin_count as f64).floor() as usize).min(bin_count - 1)
}

/// Order-independent compensated (Neumaier) sum.
fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values.iter() {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Equal-width-bin ECE: `sum_b (n_b / n) * |acc_b - conf_b|`.
pub fn compute_ece(records: &[PredictionRecord], bin_count: usize) -> Result<CalibrationReport> {
    let first = records.first().ok_or(Error::EmptyInput)?;
    if bin_count == 0 {
        return Err(Error::InvalidArgument("bin count must be at least 1".into()));
    }
    let mut tasks: Vec<&str> = records.iter().map(|r| r.task.as_str()).collect();
    tasks.sort_unstable();
    tasks.dedup();
    if tasks.len() > 1 {
        return Err(Error::MixedTasks(tasks.into_iter().map(String::from).collect()));
    }

    let mut confidences: Vec<Vec<f64>> = vec![Vec::new(); bin_count];
    let mut hits = vec![0usize; bin_count];
    for r in records {
        check_confidence(r.confidence)?;
        let b = bin_index(r.confidence, bin_count);
        confidences[b].push(r.confidence);
        hits[b] += r.correct as usize;
    }

    let n = records.len();
    let width = 1.0 / bin_count as f64;
    let mut total_conf = 0.0;
    let mut ece = 0.0;
    let bins: Vec<BinStat> = confidences
        .iter_mut()
        .zip(&hits)
        .enumerate()
        .map(|(b, (confs, &hit))| {
            let count = confs.len();
            let conf_sum = sorted_sum(confs);
            total_conf += conf_sum;
            let (mean_confidence, accuracy, gap) = if count == 0 {
                (0.0, 0.0, 0.0)
            } else {
                let mc = conf_sum / count as f64;
                let acc = hit as f64 / count as f64;
                (mc, acc, (acc - mc).abs())
            };
            ece += count as f64 / n as f64 * gap;
            BinStat {
                lower: b as f64 * width,
                upper: if b + 1 == bin_count { 1.0 } else { (b + 1) as f64 * width },
                count,
                mean_confidence,
                accuracy,
                gap,
            }
        })
        .collect();

    Ok(CalibrationReport {
        task: first.task.clone(),
        n,
        accuracy: hits.iter().sum::<usize>() as f64 / n as f64,
        mean_confidence: total_conf / n as f64,
        ece: ece.clamp(0.0, 1.0),
        bins,
        bin_count,
    })
}

pub fn mean_confidence(records: &[PredictionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut values: Vec<f64> = records.iter().map(|r| r.confidence).collect();
    Ok(sorted_sum(&mut values) / records.len() as f64)
}

/// Reliability-diagram data: every bin, empty ones included.
pub fn reliability_bins(report: &CalibrationReport) -> Vec<BinStat> {
    report.bins.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(conf: f64, correct: bool) -> PredictionRecord {
        PredictionRecord::new("t", "s", conf, correct).unwrap()
    }

    fn four_records() -> Vec<PredictionRecord> {
        vec![rec(0.95, true), rec(0.95, false), rec(0.55, true), rec(0.55, true)]
    }

    #[test]
    fn perfect_calibration() {
        let r = compute_ece(&vec![rec(1.0, true); 20], 10).unwrap();
        assert_eq!((r.ece, r.accuracy, r.mean_confidence), (0.0, 1.0, 1.0));
    }

    #[test]
    fn four_record_hand_example() {
        let r = compute_ece(&four_records(), 10).unwrap();
        assert!((r.ece - 0.45).abs() < 1e-12, "{}", r.ece);
        let filled: Vec<_> = r.bins.iter().filter(|b| b.count > 0).collect();
        assert_eq!(filled.len(), 2);
        assert_eq!((filled[0].lower, filled[0].count), (0.5, 2));
        assert_eq!((filled[1].upper, filled[1].count), (1.0, 2));
        for b in filled {
            assert!((b.gap - 0.45).abs() < 1e-12);
        }
    }

    #[test]
    fn bin_edges_and_top_bin() {
        assert_eq!(bin_index(0.5, 10), 5);
        assert_eq!(bin_index(1.0, 10), 9);
        assert_eq!(bin_index(0.0, 10), 0);
        assert_eq!(bin_index(0.999, 1), 0);
        let r = compute_ece(&vec![rec(0.75, true); 5], 2).unwrap();
        let bins = reliability_bins(&r);
        assert_eq!((bins[0].count, bins[1].count), (0, 5));
        assert_eq!(bins[0].gap, 0.0);
    }

    #[test]
    fn single_bin_identity() {
        let recs = vec![rec(0.3, true), rec(0.9, false), rec(0.61, true), rec(0.05, false), rec(0.77, true)];
        let r = compute_ece(&recs, 1).unwrap();
        assert_eq!(r.ece, (r.accuracy - r.mean_confidence).abs());
    }

    #[test]
    fn full_confidence_gap_is_error_rate() {
        let recs: Vec<_> = (0..10).map(|i| rec(1.0, i < 3)).collect();
        let r = compute_ece(&recs, 10).unwrap();
        assert_eq!(r.ece, 1.0 - r.accuracy);
    }

    #[test]
    fn errors() {
        assert!(matches!(compute_ece(&[], 10), Err(Error::EmptyInput)));
        let mixed = vec![rec(0.5, true), PredictionRecord::new("u", "s", 0.5, true).unwrap()];
        assert!(matches!(compute_ece(&mixed, 10), Err(Error::MixedTasks(_))));
        assert!(PredictionRecord::new("t", "s", 1.3, true).is_err());
        assert!(PredictionRecord::new("t", "s", f64::NAN, true).is_err());
        assert!(matches!(mean_confidence(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn mean_confidence_examples() {
        assert_eq!(mean_confidence(&[rec(0.4, true), rec(0.6, false)]).unwrap(), 0.5);
        assert_eq!(mean_confidence(&[rec(0.93, true)]).unwrap(), 0.93);
    }

    #[test]
    fn counts_sum_to_n() {
        let recs: Vec<_> = (0..=100).map(|i| rec(i as f64 / 100.0, i % 3 == 0)).collect();
        let r = compute_ece(&recs, 7).unwrap();
        assert_eq!(r.bins.iter().map(|b| b.count).sum::<usize>(), r.n);
        let weighted: f64 = r.bins.iter().map(|b| b.count as f64 / r.n as f64 * b.gap).sum();
        assert!((weighted - r.ece).abs() < 1e-15);
    }
}
