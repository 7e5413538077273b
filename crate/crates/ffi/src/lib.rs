//! C ABI over `frontier_merge`.
//!
//! Conventions: every fallible call returns an [`FmStatus`]; on failure a
//! description is available from [`fm_last_error_message`] on the same
//! thread. Handles are created by `*_open`/`*_from_json` and released with the
//! matching `*_free`. Array arguments may be NULL only when their length is 0.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use frontier_merge::calibration::{compute_ece, PredictionRecord};
use frontier_merge::frontier::{pareto_classify, SweepPoint};
use frontier_merge::merge::{
    dare_drop_rescale, merge_checkpoints, merge_linear, merge_onto_base, merge_slerp,
    merge_task_arithmetic, ties_trim, MergeRecipe,
};
use frontier_merge::tensor_store::{
    bf16_bits_to_f32, f16_bits_to_f32, f32_to_bf16_bits, f32_to_f16_bits, open_checkpoint,
    CheckpointManifest, Dtype, TensorBuffer,
};
use frontier_merge::Error;

/// Result of every fallible call. Values are stable across releases.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BufferTooSmall = 3,
    Io = 10,
    MalformedHeader = 11,
    UnknownTensor = 12,
    DuplicateTensor = 13,
    UnsupportedDtype = 14,
    ShapeMismatch = 15,
    DtypeMismatch = 16,
    TensorSetMismatch = 17,
    InvalidRecipe = 20,
    EmptyInput = 30,
    MixedTasks = 31,
    InvalidConfidence = 32,
    MalformedLine = 33,
    ConfidenceOutOfRange = 34,
    MalformedRow = 35,
    DuplicateKey = 36,
    InconsistentBundle = 37,
    MissingTask = 40,
    MissingParents = 41,
    TooFewPoints = 42,
    InvalidSweep = 43,
    SweepFailed = 44,
    InvalidArgument = 50,
    Serialization = 51,
    Panic = 99,
}

const ALL_STATUSES: [FmStatus; 29] = [
    FmStatus::Ok,
    FmStatus::NullPointer,
    FmStatus::InvalidUtf8,
    FmStatus::BufferTooSmall,
    FmStatus::Io,
    FmStatus::MalformedHeader,
    FmStatus::UnknownTensor,
    FmStatus::DuplicateTensor,
    FmStatus::UnsupportedDtype,
    FmStatus::ShapeMismatch,
    FmStatus::DtypeMismatch,
    FmStatus::TensorSetMismatch,
    FmStatus::InvalidRecipe,
    FmStatus::EmptyInput,
    FmStatus::MixedTasks,
    FmStatus::InvalidConfidence,
    FmStatus::MalformedLine,
    FmStatus::ConfidenceOutOfRange,
    FmStatus::MalformedRow,
    FmStatus::DuplicateKey,
    FmStatus::InconsistentBundle,
    FmStatus::MissingTask,
    FmStatus::MissingParents,
    FmStatus::TooFewPoints,
    FmStatus::InvalidSweep,
    FmStatus::SweepFailed,
    FmStatus::InvalidArgument,
    FmStatus::Serialization,
    FmStatus::Panic,
];

impl FmStatus {
    fn token(self) -> &'static CStr {
        match self {
            FmStatus::Ok => c"OK",
            FmStatus::NullPointer => c"NULL_POINTER",
            FmStatus::InvalidUtf8 => c"INVALID_UTF8",
            FmStatus::BufferTooSmall => c"BUFFER_TOO_SMALL",
            FmStatus::Io => c"IO_ERROR",
            FmStatus::MalformedHeader => c"MALFORMED_HEADER",
            FmStatus::UnknownTensor => c"UNKNOWN_TENSOR",
            FmStatus::DuplicateTensor => c"DUPLICATE_TENSOR",
            FmStatus::UnsupportedDtype => c"UNSUPPORTED_DTYPE",
            FmStatus::ShapeMismatch => c"SHAPE_MISMATCH",
            FmStatus::DtypeMismatch => c"DTYPE_MISMATCH",
            FmStatus::TensorSetMismatch => c"TENSOR_SET_MISMATCH",
            FmStatus::InvalidRecipe => c"INVALID_RECIPE",
            FmStatus::EmptyInput => c"EMPTY_INPUT",
            FmStatus::MixedTasks => c"MIXED_TASKS",
            FmStatus::InvalidConfidence => c"INVALID_CONFIDENCE",
            FmStatus::MalformedLine => c"MALFORMED_LINE",
            FmStatus::ConfidenceOutOfRange => c"CONFIDENCE_OUT_OF_RANGE",
            FmStatus::MalformedRow => c"MALFORMED_ROW",
            FmStatus::DuplicateKey => c"DUPLICATE_KEY",
            FmStatus::InconsistentBundle => c"INCONSISTENT_BUNDLE",
            FmStatus::MissingTask => c"MISSING_TASK",
            FmStatus::MissingParents => c"MISSING_PARENTS",
            FmStatus::TooFewPoints => c"TOO_FEW_POINTS",
            FmStatus::InvalidSweep => c"INVALID_SWEEP",
            FmStatus::SweepFailed => c"SWEEP_FAILED",
            FmStatus::InvalidArgument => c"INVALID_ARGUMENT",
            FmStatus::Serialization => c"SERIALIZATION",
            FmStatus::Panic => c"PANIC",
        }
    }
}

impl From<&Error> for FmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => FmStatus::Io,
            Error::MalformedHeader(_) => FmStatus::MalformedHeader,
            Error::UnknownTensor(_) => FmStatus::UnknownTensor,
            Error::DuplicateTensor(_) => FmStatus::DuplicateTensor,
            Error::UnsupportedDtype { .. } => FmStatus::UnsupportedDtype,
            Error::ShapeMismatch { .. } => FmStatus::ShapeMismatch,
            Error::DtypeMismatch { .. } => FmStatus::DtypeMismatch,
            Error::TensorSetMismatch { .. } => FmStatus::TensorSetMismatch,
            Error::InvalidRecipe(_) => FmStatus::InvalidRecipe,
            Error::EmptyInput => FmStatus::EmptyInput,
            Error::MixedTasks(_) => FmStatus::MixedTasks,
            Error::InvalidConfidence { .. } => FmStatus::InvalidConfidence,
            Error::MalformedLine { .. } => FmStatus::MalformedLine,
            Error::ConfidenceOutOfRange { .. } => FmStatus::ConfidenceOutOfRange,
            Error::MalformedRow { .. } => FmStatus::MalformedRow,
            Error::DuplicateKey { .. } => FmStatus::DuplicateKey,
            Error::InconsistentBundle { .. } => FmStatus::InconsistentBundle,
            Error::MissingTask { .. } => FmStatus::MissingTask,
            Error::MissingParents => FmStatus::MissingParents,
            Error::TooFewPoints { .. } => FmStatus::TooFewPoints,
            Error::InvalidSweep(_) => FmStatus::InvalidSweep,
            Error::SweepFailed(_) => FmStatus::SweepFailed,
            Error::InvalidArgument(_) => FmStatus::InvalidArgument,
            Error::Serialization(_) => FmStatus::Serialization,
        }
    }
}

/// Storage type of a tensor.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmDtype {
    F32 = 0,
    F16 = 1,
    Bf16 = 2,
    F64 = 3,
    I64 = 4,
    I32 = 5,
    I16 = 6,
    I8 = 7,
    U8 = 8,
    Bool = 9,
}

impl From<Dtype> for FmDtype {
    fn from(d: Dtype) -> Self {
        match d {
            Dtype::F32 => FmDtype::F32,
            Dtype::F16 => FmDtype::F16,
            Dtype::BF16 => FmDtype::Bf16,
            Dtype::F64 => FmDtype::F64,
            Dtype::I64 => FmDtype::I64,
            Dtype::I32 => FmDtype::I32,
            Dtype::I16 => FmDtype::I16,
            Dtype::I8 => FmDtype::I8,
            Dtype::U8 => FmDtype::U8,
            Dtype::Bool => FmDtype::Bool,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmTensorInfo {
    pub dtype: FmDtype,
    pub ndim: usize,
    pub numel: usize,
    pub byte_len: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FmCalibration {
    pub n: usize,
    /// Fraction correct in [0, 1].
    pub accuracy: f64,
    pub mean_confidence: f64,
    pub ece: f64,
}

/// Opaque checkpoint handle.
pub struct FmCheckpoint {
    manifest: CheckpointManifest,
    names: Vec<CString>,
}

/// Opaque merge recipe handle.
pub struct FmRecipe {
    recipe: MergeRecipe,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: FmStatus,
    message: String,
}

impl Failure {
    fn new(status: FmStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::new(FmStatus::from(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            FmStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            FmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::new(FmStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(FmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(FmStatus::NullPointer, format!("{what} is NULL")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut_arg<'a, T>(p: *mut T, len: usize, what: &str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::new(FmStatus::NullPointer, format!("{what} is NULL")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure::new(FmStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure::new(FmStatus::NullPointer, format!("{what} is NULL")))
}

fn tensor_at(handle: &FmCheckpoint, index: usize) -> FfiResult<&frontier_merge::tensor_store::TensorInfo> {
    handle.manifest.tensors.get(index).ok_or_else(|| {
        Failure::new(
            FmStatus::InvalidArgument,
            format!("tensor index {index} out of range ({})", handle.manifest.len()),
        )
    })
}

/// Library version, e.g. "0.1.0". Static storage.
#[no_mangle]
pub extern "C" fn fm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Stable token for a status code ("MALFORMED_HEADER", ...), or NULL for an
/// unknown code. Static storage.
#[no_mangle]
pub extern "C" fn fm_status_name(code: c_int) -> *const c_char {
    ALL_STATUSES
        .iter()
        .find(|s| **s as c_int == code)
        .map_or(ptr::null(), |s| s.token().as_ptr())
}

/// Message for the last failed call on this thread, or NULL after a success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn fm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Open a safetensors file (or a shard index `.json`).
#[no_mangle]
pub unsafe extern "C" fn fm_checkpoint_open(path: *const c_char, out: *mut *mut FmCheckpoint) -> FmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let manifest = open_checkpoint(str_arg(path, "path")?)?;
        let names = manifest
            .tensors
            .iter()
            .map(|t| CString::new(t.name.as_str()))
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::new(FmStatus::MalformedHeader, "tensor name contains NUL"))?;
        *out = Box::into_raw(Box::new(FmCheckpoint { manifest, names }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fm_checkpoint_free(handle: *mut FmCheckpoint) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of tensors; 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn fm_checkpoint_tensor_count(handle: *const FmCheckpoint) -> usize {
    handle.as_ref().map_or(0, |h| h.manifest.len())
}

/// Name of tensor `index`; the string lives as long as the handle.
#[no_mangle]
pub unsafe extern "C" fn fm_checkpoint_tensor_name(
    handle: *const FmCheckpoint,
    index: usize,
    out: *mut *const c_char,
) -> FmStatus {
    guard(|| {
        let h = ref_arg(handle, "handle")?;
        let out = out_arg(out, "out")?;
        tensor_at(h, index)?;
        *out = h.names[index].as_ptr();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fm_checkpoint_tensor_info(
    handle: *const FmCheckpoint,
    index: usize,
    out: *mut FmTensorInfo,
) -> FmStatus {
    guard(|| {
        let h = ref_arg(handle, "handle")?;
        let out = out_arg(out, "out")?;
        let t = tensor_at(h, index)?;
        *out = FmTensorInfo {
            dtype: t.dtype.into(),
            ndim: t.shape.len(),
            numel: t.numel(),
            byte_len: t.byte_len(),
        };
        Ok(())
    })
}

/// Copy the shape of tensor `index` into `dims` (capacity `cap`). `ndim` always
/// receives the rank; BUFFER_TOO_SMALL when `cap` is below it.
#[no_mangle]
pub unsafe extern "C" fn fm_checkpoint_tensor_shape(
    handle: *const FmCheckpoint,
    index: usize,
    dims: *mut usize,
    cap: usize,
    ndim: *mut usize,
) -> FmStatus {
    guard(|| {
        let h = ref_arg(handle, "handle")?;
        let ndim = out_arg(ndim, "ndim")?;
        let t = tensor_at(h, index)?;
        *ndim = t.shape.len();
        if cap < t.shape.len() {
            return Err(Failure::new(
                FmStatus::BufferTooSmall,
                format!("shape has {} dims, buffer holds {cap}", t.shape.len()),
            ));
        }
        slice_mut_arg(dims, t.shape.len(), "dims")?.copy_from_slice(&t.shape);
        Ok(())
    })
}

/// Decode tensor `name` to F32 into `out`; `len` must equal its element count.
#[no_mangle]
pub unsafe extern "C" fn fm_checkpoint_load_f32(
    handle: *const FmCheckpoint,
    name: *const c_char,
    out: *mut f32,
    len: usize,
) -> FmStatus {
    guard(|| {
        let h = ref_arg(handle, "handle")?;
        let tensor = h.manifest.load_tensor(str_arg(name, "name")?)?;
        if len != tensor.values.len() {
            return Err(Failure::new(
                FmStatus::BufferTooSmall,
                format!("tensor has {} elements, buffer holds {len}", tensor.values.len()),
            ));
        }
        slice_mut_arg(out, len, "out")?.copy_from_slice(&tensor.values);
        Ok(())
    })
}

/// Parse and validate a JSON recipe.
#[no_mangle]
pub unsafe extern "C" fn fm_recipe_from_json(json: *const c_char, out: *mut *mut FmRecipe) -> FmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let recipe: MergeRecipe = serde_json::from_str(str_arg(json, "json")?)
            .map_err(|e| Failure::from(Error::InvalidRecipe(e.to_string())))?;
        recipe.validate()?;
        *out = Box::into_raw(Box::new(FmRecipe { recipe }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fm_recipe_free(handle: *mut FmRecipe) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Change the recipe's lambda; the recipe is left untouched if the new value
/// is invalid for its method.
#[no_mangle]
pub unsafe extern "C" fn fm_recipe_set_lambda(handle: *mut FmRecipe, lambda: f64) -> FmStatus {
    guard(|| {
        let h = out_arg(handle, "handle")?;
        let updated = h.recipe.with_lambda(lambda);
        updated.validate()?;
        h.recipe = updated;
        Ok(())
    })
}

/// Hex SHA-256 of the canonical recipe JSON, NUL-terminated; `cap` >= 65.
#[no_mangle]
pub unsafe extern "C" fn fm_recipe_provenance_hash(handle: *const FmRecipe, buf: *mut c_char, cap: usize) -> FmStatus {
    guard(|| {
        let h = ref_arg(handle, "handle")?;
        let hash = h.recipe.provenance_hash();
        if cap <= hash.len() {
            return Err(Failure::new(FmStatus::BufferTooSmall, format!("need {} bytes", hash.len() + 1)));
        }
        let dst = slice_mut_arg(buf, hash.len() + 1, "buf")?;
        for (d, s) in dst.iter_mut().zip(hash.bytes().chain([0])) {
            *d = s as c_char;
        }
        Ok(())
    })
}

/// Stream-merge `pt` and `it` into a new safetensors file at `out_path`.
#[no_mangle]
pub unsafe extern "C" fn fm_merge(
    pt: *const FmCheckpoint,
    it: *const FmCheckpoint,
    recipe: *const FmRecipe,
    out_path: *const c_char,
) -> FmStatus {
    guard(|| {
        merge_checkpoints(
            &ref_arg(pt, "pt")?.manifest,
            &ref_arg(it, "it")?.manifest,
            &ref_arg(recipe, "recipe")?.recipe,
            str_arg(out_path, "out_path")?,
        )?;
        Ok(())
    })
}

/// Add `lambda * (it - pt)` (sparsified for dare-ties) to `base`.
#[no_mangle]
pub unsafe extern "C" fn fm_merge_onto_base(
    base: *const FmCheckpoint,
    pt: *const FmCheckpoint,
    it: *const FmCheckpoint,
    recipe: *const FmRecipe,
    out_path: *const c_char,
) -> FmStatus {
    guard(|| {
        merge_onto_base(
            &ref_arg(base, "base")?.manifest,
            &ref_arg(pt, "pt")?.manifest,
            &ref_arg(it, "it")?.manifest,
            &ref_arg(recipe, "recipe")?.recipe,
            str_arg(out_path, "out_path")?,
        )?;
        Ok(())
    })
}

unsafe fn buffer(p: *const f32, n: usize, what: &str) -> FfiResult<TensorBuffer> {
    Ok(TensorBuffer::from_vec(what, slice_arg(p, n, what)?.to_vec()))
}

unsafe fn emit(result: TensorBuffer, out: *mut f32, n: usize) -> FfiResult<()> {
    slice_mut_arg(out, n, "out")?.copy_from_slice(&result.values);
    Ok(())
}

/// `out = (1 - lambda) * a + lambda * b`, elementwise over `n` values.
#[no_mangle]
pub unsafe extern "C" fn fm_merge_linear(
    a: *const f32,
    b: *const f32,
    n: usize,
    lambda: f64,
    out: *mut f32,
) -> FmStatus {
    guard(|| {
        let r = merge_linear(&buffer(a, n, "a")?, &buffer(b, n, "b")?, lambda)?;
        emit(r, out, n)
    })
}

/// Spherical interpolation of two `n`-vectors, linear below `eps`.
#[no_mangle]
pub unsafe extern "C" fn fm_merge_slerp(
    a: *const f32,
    b: *const f32,
    n: usize,
    lambda: f64,
    eps: f64,
    out: *mut f32,
) -> FmStatus {
    guard(|| {
        let r = merge_slerp(&buffer(a, n, "a")?, &buffer(b, n, "b")?, lambda, eps)?;
        emit(r, out, n)
    })
}

/// `out = base + lambda * delta`.
#[no_mangle]
pub unsafe extern "C" fn fm_task_arithmetic(
    base: *const f32,
    delta: *const f32,
    n: usize,
    lambda: f64,
    out: *mut f32,
) -> FmStatus {
    guard(|| {
        let r = merge_task_arithmetic(&buffer(base, n, "base")?, &buffer(delta, n, "delta")?, lambda)?;
        emit(r, out, n)
    })
}

/// DARE drop-and-rescale of `delta`, keyed by (`seed`, `name`, element index).
#[no_mangle]
pub unsafe extern "C" fn fm_dare_drop_rescale(
    delta: *const f32,
    n: usize,
    density: f64,
    seed: u64,
    name: *const c_char,
    out: *mut f32,
) -> FmStatus {
    guard(|| {
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::InvalidArgument(format!("density {density} outside (0, 1]")).into());
        }
        let name = str_arg(name, "name")?;
        let r = dare_drop_rescale(&buffer(delta, n, "delta")?, density, seed, name);
        emit(r, out, n)
    })
}

/// Zero the `floor(fraction * n)` smallest-magnitude entries of `delta`.
#[no_mangle]
pub unsafe extern "C" fn fm_ties_trim(delta: *const f32, n: usize, fraction: f64, out: *mut f32) -> FmStatus {
    guard(|| {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::InvalidArgument(format!("trim fraction {fraction} outside [0, 1)")).into());
        }
        let r = ties_trim(&buffer(delta, n, "delta")?, fraction);
        emit(r, out, n)
    })
}

/// F32 to BF16 bits, round to nearest even.
#[no_mangle]
pub extern "C" fn fm_f32_to_bf16(value: f32) -> u16 {
    f32_to_bf16_bits(value)
}

#[no_mangle]
pub extern "C" fn fm_bf16_to_f32(bits: u16) -> f32 {
    bf16_bits_to_f32(bits)
}

/// F32 to IEEE half bits, round to nearest even, overflow to infinity.
#[no_mangle]
pub extern "C" fn fm_f32_to_f16(value: f32) -> u16 {
    f32_to_f16_bits(value)
}

#[no_mangle]
pub extern "C" fn fm_f16_to_f32(bits: u16) -> f32 {
    f16_bits_to_f32(bits)
}

/// ECE over `n` (confidence, correct) pairs with `bins` equal-width bins.
/// `correct` entries are 0 or nonzero.
#[no_mangle]
pub unsafe extern "C" fn fm_compute_ece(
    confidence: *const f64,
    correct: *const u8,
    n: usize,
    bins: usize,
    out: *mut FmCalibration,
) -> FmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let conf = slice_arg(confidence, n, "confidence")?;
        let hits = slice_arg(correct, n, "correct")?;
        let records = conf
            .iter()
            .zip(hits)
            .enumerate()
            .map(|(i, (&c, &h))| PredictionRecord::new("ffi", i.to_string(), c, h != 0))
            .collect::<Result<Vec<_>, _>>()?;
        let report = compute_ece(&records, bins)?;
        *out = FmCalibration {
            n: report.n,
            accuracy: report.accuracy,
            mean_confidence: report.mean_confidence,
            ece: report.ece,
        };
        Ok(())
    })
}

/// Mark each of `n` (accuracy, ece) points: 1 when no other point dominates it.
#[no_mangle]
pub unsafe extern "C" fn fm_pareto_frontier(
    accuracy: *const f64,
    ece: *const f64,
    n: usize,
    on_frontier: *mut u8,
) -> FmStatus {
    guard(|| {
        let acc = slice_arg(accuracy, n, "accuracy")?;
        let ece = slice_arg(ece, n, "ece")?;
        let flags = slice_mut_arg(on_frontier, n, "on_frontier")?;
        let points: Vec<SweepPoint> = acc
            .iter()
            .zip(ece)
            .enumerate()
            .map(|(i, (&a, &e))| SweepPoint::new(i as f64, i.to_string()).with_task("t", a, Some(e)))
            .collect();
        if points.is_empty() {
            return Ok(());
        }
        let result = pareto_classify(&points, "t", "t")?;
        for (i, f) in flags.iter_mut().enumerate() {
            *f = result.is_on_frontier(i) as u8;
        }
        Ok(())
    })
}
