use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Metadata key under which a merged checkpoint records the recipe that made it.
pub const RECIPE_METADATA_KEY: &str = "frontier_merge.recipe";

pub const DEFAULT_DENSITY: f64 = 0.9;
pub const DEFAULT_COLINEAR_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MergeMethod {
    #[serde(alias = "Linear")]
    Linear,
    #[serde(alias = "Slerp")]
    Slerp,
    #[serde(alias = "TaskArithmetic", alias = "task_arithmetic", alias = "task-arithmetic")]
    TaskArith,
    #[serde(alias = "DareTies", alias = "dare_ties")]
    DareTies,
}

impl MergeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MergeMethod::Linear => "linear",
            MergeMethod::Slerp => "slerp",
            MergeMethod::TaskArith => "task-arith",
            MergeMethod::DareTies => "dare-ties",
        }
    }

    /// Methods that interpolate between the parents rather than extrapolate.
    pub fn is_interpolating(self) -> bool {
        !matches!(self, MergeMethod::TaskArith)
    }
}

impl fmt::Display for MergeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MergeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::InvalidRecipe(format!("unknown merge method `{s}`")))
    }
}

/// What to do with integer/bool tensors, which are never interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonFloatPolicy {
    #[default]
    #[serde(alias = "CopyIT", alias = "copy_it")]
    CopyIt,
    #[serde(alias = "Error")]
    Error,
}

impl FromStr for NonFloatPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::InvalidRecipe(format!("unknown non-float policy `{s}`")))
    }
}

fn default_density() -> f64 {
    DEFAULT_DENSITY
}

fn default_eps() -> f64 {
    DEFAULT_COLINEAR_EPSILON
}

/// Declarative description of one merge job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeRecipe {
    pub method: MergeMethod,
    pub lambda: f64,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default)]
    pub trim_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub colinear_epsilon: f64,
    #[serde(default)]
    pub non_float_policy: NonFloatPolicy,
}

impl MergeRecipe {
    pub fn new(method: MergeMethod, lambda: f64) -> Self {
        Self {
            method,
            lambda,
            density: DEFAULT_DENSITY,
            trim_fraction: 0.0,
            seed: 0,
            colinear_epsilon: DEFAULT_COLINEAR_EPSILON,
            non_float_policy: NonFloatPolicy::CopyIt,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRecipe(m));
        if !self.lambda.is_finite() {
            return bad(format!("lambda {} is not finite", self.lambda));
        }
        if self.method.is_interpolating() && !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!(
                "lambda {} outside [0, 1] for {}",
                self.lambda, self.method
            ));
        }
        if self.lambda < 0.0 {
            return bad(format!("lambda {} is negative", self.lambda));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density {} outside (0, 1]", self.density));
        }
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return bad(format!("trim_fraction {} outside [0, 1)", self.trim_fraction));
        }
        if !(self.colinear_epsilon > 0.0 && self.colinear_epsilon.is_finite()) {
            return bad(format!(
                "colinear_epsilon {} must be positive",
                self.colinear_epsilon
            ));
        }
        Ok(())
    }

    /// Parse a JSON or YAML recipe (YAML when the extension says so).
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let yaml = path
            .extension()
            .is_some_and(|e| e == "yaml" || e == "yml");
        let recipe: Self = if yaml {
            serde_yaml::from_str(&text).map_err(|e| Error::InvalidRecipe(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::InvalidRecipe(e.to_string()))?
        };
        recipe.validate()?;
        Ok(recipe)
    }

    /// Stable JSON form; this is what lands in the output header.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("recipe serializes")
    }

    pub fn provenance_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_json().as_bytes()))
    }
}
