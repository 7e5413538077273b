//! Streaming access to safetensors checkpoints.
//!
//! A [`CheckpointManifest`] indexes tensors without touching their data;
//! tensors are pulled one at a time into F32 [`TensorBuffer`]s and written
//! back through [`CheckpointWriter`] or [`write_checkpoint`]. Half-precision
//! storage is converted at this boundary only.

mod dtype;
mod manifest;
mod shard;
mod writer;

pub use dtype::{
    bf16_bits_to_f32, convert_dtype, f16_bits_to_f32, f32_to_bf16_bits, f32_to_f16_bits, Dtype,
};
pub use manifest::{
    load_tensor, open_checkpoint, parse_container, CheckpointManifest, ParsedHeader, ShardFile,
    TensorInfo, MAX_HEADER_LEN,
};
pub use writer::{write_checkpoint, CheckpointWriter, TensorLayout};

use crate::error::{Error, Result};

/// One tensor in working precision (row-major F32), tagged with the dtype it
/// is stored as.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBuffer {
    pub name: String,
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    pub values: Vec<f32>,
}

impl TensorBuffer {
    pub fn new(
        name: impl Into<String>,
        dtype: Dtype,
        shape: Vec<usize>,
        values: Vec<f32>,
    ) -> Result<Self> {
        let t = Self {
            name: name.into(),
            dtype,
            shape,
            values,
        };
        t.check_len()?;
        Ok(t)
    }

    /// Convenience for 1-D F32 tensors.
    pub fn from_vec(name: impl Into<String>, values: Vec<f32>) -> Self {
        let shape = vec![values.len()];
        Self {
            name: name.into(),
            dtype: Dtype::F32,
            shape,
            values,
        }
    }

    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_mergeable(&self) -> bool {
        self.dtype.is_float()
    }

    pub(crate) fn check_len(&self) -> Result<()> {
        if self.values.len() != self.numel() {
            return Err(Error::InvalidArgument(format!(
                "tensor `{}` has {} values for shape {:?}",
                self.name,
                self.values.len(),
                self.shape
            )));
        }
        Ok(())
    }

    /// Same metadata, new values.
    pub(crate) fn with_values(&self, values: Vec<f32>) -> Self {
        Self {
            name: self.name.clone(),
            dtype: self.dtype,
            shape: self.shape.clone(),
            values,
        }
    }
}
