//! DARE drop-and-rescale and TIES magnitude trimming of task vectors.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::kernels::CHUNK;
use crate::tensor_store::TensorBuffer;

/// 64-bit FNV-1a. Stable across platforms and releases, unlike `DefaultHasher`.
pub fn stable_name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Counter-based stream for one tensor: element `i` always draws the 64-bit
/// word at position `i`, keyed by `(seed, hash(name))`.
fn keyed_stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stable_name_hash(name).to_le_bytes());
    key[16..24].copy_from_slice(b"dare-drp");
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in [0, 1) for element `index`.
pub fn element_uniform(seed: u64, name: &str, index: u64) -> f64 {
    let mut rng = keyed_stream(seed, name);
    rng.set_word_pos(2 * index as u128);
    to_unit(rng.next_u64())
}

fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn dare_in_place(values: &mut [f32], density: f64, seed: u64, name: &str) {
    if density >= 1.0 {
        return;
    }
    let base = keyed_stream(seed, name);
    values
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(chunk_idx, chunk)| {
            let mut rng = base.clone();
            rng.set_word_pos(2 * (chunk_idx * CHUNK) as u128);
            for v in chunk {
                *v = if to_unit(rng.next_u64()) < density {
                    (*v as f64 / density) as f32
                } else {
                    0.0
                };
            }
        });
}

/// Zero each element independently with probability `1 - density` and scale
/// survivors by `1 / density`. The mask depends only on `(seed, tensor_name)`
/// and element position.
pub fn dare_drop_rescale(
    delta: &TensorBuffer,
    density: f64,
    seed: u64,
    tensor_name: &str,
) -> TensorBuffer {
    let mut values = delta.values.clone();
    dare_in_place(&mut values, density, seed, tensor_name);
    delta.with_values(values)
}

/// Number of elements a trim of `fraction` zeroes out of `n`.
pub fn trim_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).floor() as usize).min(n)
}

/// Position type for the trim selection; u32 halves its memory on tensors
/// below 4G elements.
trait Position: Copy + Ord {
    fn from_usize(i: usize) -> Self;
    fn get(self) -> usize;
}

impl Position for u32 {
    fn from_usize(i: usize) -> Self {
        i as u32
    }
    fn get(self) -> usize {
        self as usize
    }
}

impl Position for usize {
    fn from_usize(i: usize) -> Self {
        i
    }
    fn get(self) -> usize {
        self
    }
}

pub(crate) fn trim_in_place(values: &mut [f32], fraction: f64) {
    let k = trim_count(values.len(), fraction);
    if k == 0 {
        return;
    }
    if values.len() <= u32::MAX as usize {
        trim_smallest::<u32>(values, k);
    } else {
        trim_smallest::<usize>(values, k);
    }
}

fn trim_smallest<P: Position>(values: &mut [f32], k: usize) {
    let mut order: Vec<P> = (0..values.len()).map(P::from_usize).collect();
    // smallest magnitude first; equal magnitudes ordered by position
    order.select_nth_unstable_by(k - 1, |&x, &y| {
        values[x.get()]
            .abs()
            .total_cmp(&values[y.get()].abs())
            .then(x.cmp(&y))
    });
    for &i in &order[..k] {
        values[i.get()] = 0.0;
    }
}

/// Zero the `floor(trim_fraction * n)` smallest-magnitude elements. Among equal
/// magnitudes the lower flat index is trimmed first.
pub fn ties_trim(delta: &TensorBuffer, trim_fraction: f64) -> TensorBuffer {
    let mut values = delta.values.clone();
    trim_in_place(&mut values, trim_fraction);
    delta.with_values(values)
}
