use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ResultBundle;
use crate::calibration::PredictionRecord;
use crate::error::{Error, Result};

/// Distribution of the predicted-answer confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceLaw {
    Uniform { low: f64, high: f64 },
    PointMass(f64),
    /// `first` with probability `weight`, otherwise `second`.
    TwoPoint { first: f64, second: f64, weight: f64 },
}

impl ConfidenceLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            ConfidenceLaw::Uniform { low, high } => 0.5 * (low + high),
            ConfidenceLaw::PointMass(c) => c,
            ConfidenceLaw::TwoPoint { first, second, weight } => weight * first + (1.0 - weight) * second,
        }
    }

    fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let ok = match *self {
            ConfidenceLaw::Uniform { low, high } => unit(low) && unit(high) && low <= high,
            ConfidenceLaw::PointMass(c) => unit(c),
            ConfidenceLaw::TwoPoint { first, second, weight } => unit(first) && unit(second) && unit(weight),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid confidence law {self:?}")))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ConfidenceLaw::Uniform { low, high } => (low + (high - low) * rng.random::<f64>()).min(high),
            ConfidenceLaw::PointMass(c) => c,
            ConfidenceLaw::TwoPoint { first, second, weight } => {
                if rng.random::<f64>() < weight {
                    first
                } else {
                    second
                }
            }
        }
    }
}

/// Probability that a prediction at a given confidence is correct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMap {
    /// Perfectly calibrated.
    Identity,
    /// Accuracy independent of confidence.
    Constant(f64),
    /// `alpha + beta * c`, clipped to [0, 1].
    Affine { alpha: f64, beta: f64 },
}

impl CalibrationMap {
    pub fn probability(&self, confidence: f64) -> f64 {
        match *self {
            CalibrationMap::Identity => confidence,
            CalibrationMap::Constant(p) => p,
            CalibrationMap::Affine { alpha, beta } => alpha + beta * confidence,
        }
        .clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub confidence_law: ConfidenceLaw,
    pub calibration_map: CalibrationMap,
    pub seed: u64,
    #[serde(default = "default_task")]
    pub task: String,
    #[serde(default = "default_model")]
    pub model_id: String,
}

fn default_task() -> String {
    "synthetic".into()
}

fn default_model() -> String {
    "synthetic".into()
}

impl SyntheticSpec {
    pub fn new(n: usize, confidence_law: ConfidenceLaw, calibration_map: CalibrationMap, seed: u64) -> Self {
        Self {
            n,
            confidence_law,
            calibration_map,
            seed,
            task: default_task(),
            model_id: default_model(),
        }
    }
}

/// Draw `n` records; identical specs give identical bundles.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<ResultBundle> {
    spec.confidence_law.validate()?;
    if let CalibrationMap::Constant(p) = spec.calibration_map {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("constant accuracy {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut bundle = ResultBundle::new(spec.model_id.clone(), None);
    if spec.n == 0 {
        return Ok(bundle);
    }
    let records = (0..spec.n)
        .map(|i| {
            let confidence = spec.confidence_law.sample(&mut rng);
            let p = spec.calibration_map.probability(confidence);
            PredictionRecord {
                task: spec.task.clone(),
                sample_id: i.to_string(),
                confidence,
                correct: rng.random::<f64>() < p,
            }
        })
        .collect();
    bundle.records.insert(spec.task.clone(), records);
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{compute_ece, mean_confidence};

    #[test]
    fn empty_spec() {
        let b = generate_synthetic(&SyntheticSpec::new(0, ConfidenceLaw::PointMass(0.5), CalibrationMap::Identity, 1))
            .unwrap();
        assert_eq!(b.record_count(), 0);
        assert!(b.records.is_empty());
    }

    #[test]
    fn deterministic_in_seed() {
        let spec = SyntheticSpec::new(
            500,
            ConfidenceLaw::TwoPoint { first: 0.3, second: 0.9, weight: 0.25 },
            CalibrationMap::Affine { alpha: 0.1, beta: 0.8 },
            9,
        );
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec { seed: 10, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn overconfident_replica() {
        let spec = SyntheticSpec::new(10_000, ConfidenceLaw::PointMass(1.0), CalibrationMap::Constant(0.4), 4);
        let b = generate_synthetic(&spec).unwrap();
        let r = compute_ece(&b.records["synthetic"], 10).unwrap();
        assert!((r.accuracy - 0.4).abs() < 0.02);
        assert!((r.ece - 0.6).abs() < 0.02);
    }

    #[test]
    fn inflated_fixture_mean() {
        let spec = SyntheticSpec::new(1000, ConfidenceLaw::Uniform { low: 0.9, high: 1.0 }, CalibrationMap::Constant(0.4), 2);
        let b = generate_synthetic(&spec).unwrap();
        assert!(mean_confidence(&b.records["synthetic"]).unwrap() >= 0.9);
    }

    #[test]
    fn invalid_laws_rejected() {
        for law in [
            ConfidenceLaw::PointMass(1.5),
            ConfidenceLaw::Uniform { low: 0.8, high: 0.2 },
            ConfidenceLaw::TwoPoint { first: 0.1, second: 0.2, weight: -0.1 },
        ] {
            assert!(generate_synthetic(&SyntheticSpec::new(3, law, CalibrationMap::Identity, 0)).is_err());
        }
    }
}
