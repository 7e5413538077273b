//! Merge algorithms: linear, SLERP, task arithmetic and DARE-TIES, as pure
//! per-tensor kernels plus a streaming whole-checkpoint driver.

mod driver;
mod kernels;
mod recipe;
mod sparsify;

pub use driver::{check_compatible, merge_checkpoints, merge_onto_base};
pub use kernels::{
    merge_linear, merge_slerp, merge_task_arithmetic, slerp_plan, task_vector_tensor, SlerpPlan,
};
pub use recipe::{
    MergeMethod, MergeRecipe, NonFloatPolicy, DEFAULT_COLINEAR_EPSILON, DEFAULT_DENSITY,
    RECIPE_METADATA_KEY,
};
pub use sparsify::{dare_drop_rescale, element_uniform, stable_name_hash, ties_trim, trim_count};

use indexmap::IndexMap;

use crate::error::Result;
use crate::tensor_store::{CheckpointManifest, TensorBuffer};

/// Per-tensor deltas `it - pt` over the float tensors both parents share,
/// in PT order. Holds everything in memory; the checkpoint driver streams
/// instead, so this is meant for analysis of small models.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskVector {
    deltas: IndexMap<String, TensorBuffer>,
}

impl TaskVector {
    pub fn between(pt: &CheckpointManifest, it: &CheckpointManifest) -> Result<Self> {
        let mut deltas = IndexMap::new();
        for info in pt.tensors.iter().filter(|t| t.dtype.is_float()) {
            match it.tensor(&info.name) {
                Some(other) if other.dtype.is_float() => {
                    let p = pt.load_tensor(&info.name)?;
                    let i = it.load_tensor(&info.name)?;
                    deltas.insert(info.name.clone(), task_vector_tensor(&p, &i)?);
                }
                _ => {}
            }
        }
        Ok(Self { deltas })
    }

    pub fn get(&self, name: &str) -> Option<&TensorBuffer> {
        self.deltas.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.deltas.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// Euclidean norm over all deltas, in f64.
    pub fn norm(&self) -> f64 {
        self.deltas
            .values()
            .flat_map(|t| t.values.iter())
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt()
    }

    /// `base + lambda * delta` for the tensor named like `base`.
    pub fn apply(&self, base: &TensorBuffer, lambda: f64) -> Result<TensorBuffer> {
        let delta = self
            .get(&base.name)
            .ok_or_else(|| crate::Error::UnknownTensor(base.name.clone()))?;
        merge_task_arithmetic(base, delta, lambda)
    }
}
