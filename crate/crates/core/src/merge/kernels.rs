//! Per-tensor merge kernels.
//!
//! Coefficient arithmetic runs in f64 and each output element is rounded to
//! f32 once. Work is split into fixed-size chunks, so results do not depend on
//! how many threads rayon happens to use.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor_store::TensorBuffer;

/// Elements per parallel work item. Fixed so reductions sum in the same order
/// whatever the thread count.
pub(crate) const CHUNK: usize = 1 << 16;

/// How the two SLERP operands are combined, decided once per tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlerpPlan {
    /// Zero-norm or near-colinear operands: plain linear interpolation.
    Linear,
    /// Two-term sine formula with the given operand weights and angle.
    Spherical { weight_a: f64, weight_b: f64, omega: f64 },
}

pub(crate) fn check_pair(a: &TensorBuffer, b: &TensorBuffer) -> Result<()> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch {
            name: a.name.clone(),
            left: a.shape.clone(),
            right: b.shape.clone(),
        });
    }
    for t in [a, b] {
        if !t.dtype.is_float() {
            return Err(Error::UnsupportedDtype {
                name: t.name.clone(),
                dtype: t.dtype.to_string(),
            });
        }
    }
    Ok(())
}

/// `a <- weight_a * a + weight_b * b`, elementwise.
pub(crate) fn combine_in_place(a: &mut [f32], b: &[f32], weight_a: f64, weight_b: f64) {
    a.par_chunks_mut(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .for_each(|(xa, xb)| {
            for (x, &y) in xa.iter_mut().zip(xb) {
                *x = (weight_a * *x as f64 + weight_b * y as f64) as f32;
            }
        });
}

pub(crate) fn linear_in_place(a: &mut [f32], b: &[f32], lambda: f64) {
    combine_in_place(a, b, 1.0 - lambda, lambda);
}

/// `base <- base + lambda * delta`.
pub(crate) fn add_scaled_in_place(base: &mut [f32], delta: &[f32], lambda: f64) {
    combine_in_place(base, delta, 1.0, lambda);
}

/// `it <- it - pt`: turns the IT buffer into the task vector.
pub(crate) fn delta_in_place(it: &mut [f32], pt: &[f32]) {
    combine_in_place(it, pt, 1.0, -1.0);
}

/// Deterministic (dot, |a|^2, |b|^2) in f64.
fn dot_and_norms(a: &[f32], b: &[f32]) -> (f64, f64, f64) {
    let partials: Vec<(f64, f64, f64)> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(xa, xb)| {
            xa.iter().zip(xb).fold((0.0, 0.0, 0.0), |(d, na, nb), (&x, &y)| {
                let (x, y) = (x as f64, y as f64);
                (d + x * y, na + x * x, nb + y * y)
            })
        })
        .collect();
    partials
        .into_iter()
        .fold((0.0, 0.0, 0.0), |(d, na, nb), (pd, pa, pb)| {
            (d + pd, na + pa, nb + pb)
        })
}

/// Decide the SLERP combination for flattened operands `a`, `b`.
pub fn slerp_plan(a: &[f32], b: &[f32], lambda: f64, eps: f64) -> SlerpPlan {
    let (dot, na2, nb2) = dot_and_norms(a, b);
    if na2 == 0.0 || nb2 == 0.0 {
        return SlerpPlan::Linear;
    }
    let cos = (dot / (na2.sqrt() * nb2.sqrt())).clamp(-1.0, 1.0);
    let omega = cos.acos();
    let sin = omega.sin();
    if sin < eps {
        return SlerpPlan::Linear;
    }
    if cos < -1.0 + 1e-6 {
        log::warn!("SLERP operands are nearly anti-parallel (cos = {cos:.9}); the arc is ill-conditioned");
    }
    SlerpPlan::Spherical {
        weight_a: ((1.0 - lambda) * omega).sin() / sin,
        weight_b: (lambda * omega).sin() / sin,
        omega,
    }
}

pub(crate) fn slerp_in_place(a: &mut [f32], b: &[f32], lambda: f64, eps: f64) -> SlerpPlan {
    let plan = slerp_plan(a, b, lambda, eps);
    match plan {
        SlerpPlan::Linear => linear_in_place(a, b, lambda),
        SlerpPlan::Spherical {
            weight_a, weight_b, ..
        } => combine_in_place(a, b, weight_a, weight_b),
    }
    plan
}

/// `(1 - lambda) * a + lambda * b`. The endpoints return a parent unchanged.
pub fn merge_linear(a: &TensorBuffer, b: &TensorBuffer, lambda: f64) -> Result<TensorBuffer> {
    check_pair(a, b)?;
    if lambda == 0.0 {
        return Ok(a.clone());
    }
    if lambda == 1.0 {
        return Ok(b.with_values(b.values.clone()));
    }
    let mut out = a.clone();
    linear_in_place(&mut out.values, &b.values, lambda);
    Ok(out)
}

/// Spherical interpolation of the flattened tensors, falling back to linear
/// when either is zero or `sin(omega) < eps`.
pub fn merge_slerp(
    a: &TensorBuffer,
    b: &TensorBuffer,
    lambda: f64,
    eps: f64,
) -> Result<TensorBuffer> {
    check_pair(a, b)?;
    if lambda == 0.0 {
        return Ok(a.clone());
    }
    if lambda == 1.0 {
        return Ok(b.with_values(b.values.clone()));
    }
    let mut out = a.clone();
    slerp_in_place(&mut out.values, &b.values, lambda, eps);
    Ok(out)
}

/// `base + lambda * delta`. `lambda` may exceed 1 (extrapolation).
pub fn merge_task_arithmetic(
    base: &TensorBuffer,
    delta: &TensorBuffer,
    lambda: f64,
) -> Result<TensorBuffer> {
    check_pair(base, delta)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidRecipe(format!(
            "task-arithmetic lambda {lambda} must be finite and non-negative"
        )));
    }
    if lambda == 0.0 {
        return Ok(base.clone());
    }
    let mut out = base.clone();
    add_scaled_in_place(&mut out.values, &delta.values, lambda);
    Ok(out)
}

/// Task vector `it - pt` for one tensor, named and typed after `pt`.
pub fn task_vector_tensor(pt: &TensorBuffer, it: &TensorBuffer) -> Result<TensorBuffer> {
    check_pair(pt, it)?;
    let mut values = it.values.clone();
    delta_in_place(&mut values, &pt.values);
    Ok(pt.with_values(values))
}
