#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use frontier_merge::tensor_store::{write_checkpoint, Dtype, TensorBuffer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_frontier-merge");

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn random_values(rng: &mut ChaCha8Rng, n: usize, scale: f32) -> Vec<f32> {
    (0..n).map(|_| (rng.random::<f32>() * 2.0 - 1.0) * scale).collect()
}

/// Three float tensors (BF16 and F32) plus an I64 index tensor; 12 544
/// float elements in total.
pub fn toy_tensors(seed: u64) -> Vec<TensorBuffer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        TensorBuffer::new("embed.weight", Dtype::BF16, vec![64, 128], random_values(&mut rng, 64 * 128, 0.5)).unwrap(),
        TensorBuffer::new("layers.0.mlp.weight", Dtype::F32, vec![32, 128], random_values(&mut rng, 32 * 128, 0.2)).unwrap(),
        TensorBuffer::new("layers.0.norm.weight", Dtype::BF16, vec![256], random_values(&mut rng, 256, 1.0)).unwrap(),
        TensorBuffer::new("position_ids", Dtype::I64, vec![8], (0..8).map(|i| (i as f32) + seed as f32).collect()).unwrap(),
    ]
}

pub fn write_toy(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let mut meta = BTreeMap::new();
    meta.insert("format".to_owned(), "pt".to_owned());
    write_checkpoint(&path, toy_tensors(seed), &meta).unwrap();
    path
}

/// The data region (everything after the JSON header).
pub fn data_region(path: &Path) -> Vec<u8> {
    let bytes = std::fs::read(path).unwrap();
    let n = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    bytes[8 + n..].to_vec()
}
