use std::collections::BTreeSet;
use std::path::Path;

use super::kernels::{add_scaled_in_place, delta_in_place, linear_in_place, slerp_in_place};
use super::recipe::{MergeMethod, MergeRecipe, NonFloatPolicy, RECIPE_METADATA_KEY};
use super::sparsify::{dare_in_place, trim_in_place};
use crate::error::{Error, Result};
use crate::tensor_store::{CheckpointManifest, CheckpointWriter, TensorInfo, TensorLayout};

/// Require identical tensor name sets, shapes and dtypes.
pub fn check_compatible(first: &CheckpointManifest, second: &CheckpointManifest) -> Result<()> {
    let a: BTreeSet<&str> = first.names().collect();
    let b: BTreeSet<&str> = second.names().collect();
    if a != b {
        return Err(Error::TensorSetMismatch {
            only_in_first: a.difference(&b).map(|s| s.to_string()).collect(),
            only_in_second: b.difference(&a).map(|s| s.to_string()).collect(),
        });
    }
    for t in &first.tensors {
        let other = second.tensor(&t.name).expect("same name set");
        if t.shape != other.shape {
            return Err(Error::ShapeMismatch {
                name: t.name.clone(),
                left: t.shape.clone(),
                right: other.shape.clone(),
            });
        }
        if t.dtype != other.dtype {
            return Err(Error::DtypeMismatch {
                name: t.name.clone(),
                left: t.dtype.to_string(),
                right: other.dtype.to_string(),
            });
        }
    }
    Ok(())
}

/// Merge PT and IT checkpoints tensor by tensor into `out`.
///
/// Output order and dtypes follow PT. At `lambda` 0 or 1 every method copies
/// the corresponding parent's bytes verbatim. The recipe is stored in the
/// output header under [`RECIPE_METADATA_KEY`].
pub fn merge_checkpoints(
    pt: &CheckpointManifest,
    it: &CheckpointManifest,
    recipe: &MergeRecipe,
    out: impl AsRef<Path>,
) -> Result<CheckpointManifest> {
    run(pt, it, None, recipe, out.as_ref())
}

/// Add the (optionally sparsified) task vector `it - pt`, scaled by lambda,
/// to a different backbone `base`. Only task-arith and dare-ties apply.
pub fn merge_onto_base(
    base: &CheckpointManifest,
    pt: &CheckpointManifest,
    it: &CheckpointManifest,
    recipe: &MergeRecipe,
    out: impl AsRef<Path>,
) -> Result<CheckpointManifest> {
    if !matches!(recipe.method, MergeMethod::TaskArith | MergeMethod::DareTies) {
        return Err(Error::InvalidRecipe(format!(
            "{} cannot target a separate base checkpoint",
            recipe.method
        )));
    }
    run(pt, it, Some(base), recipe, out.as_ref())
}

fn run(
    pt: &CheckpointManifest,
    it: &CheckpointManifest,
    base: Option<&CheckpointManifest>,
    recipe: &MergeRecipe,
    out: &Path,
) -> Result<CheckpointManifest> {
    recipe.validate()?;
    check_compatible(pt, it)?;
    if let Some(base) = base {
        check_compatible(pt, base)?;
    }
    let target = base.unwrap_or(pt);

    let layout = target
        .tensors
        .iter()
        .map(|t| TensorLayout::new(t.name.clone(), t.dtype, t.shape.clone()))
        .collect();
    let mut metadata = target.metadata.clone();
    metadata.insert(RECIPE_METADATA_KEY.to_owned(), recipe.to_canonical_json());

    let mut writer = CheckpointWriter::create(out, layout, &metadata)?;
    for info in &target.tensors {
        merge_one(info, pt, it, base, recipe, &mut writer)?;
    }
    let manifest = writer.finish()?;
    log::info!(
        "wrote {} tensors to {} ({} lambda={})",
        manifest.len(),
        out.display(),
        recipe.method,
        recipe.lambda
    );
    Ok(manifest)
}

fn merge_one(
    info: &TensorInfo,
    pt: &CheckpointManifest,
    it: &CheckpointManifest,
    base: Option<&CheckpointManifest>,
    recipe: &MergeRecipe,
    writer: &mut CheckpointWriter,
) -> Result<()> {
    let name = info.name.as_str();
    let target = base.unwrap_or(pt);

    if !info.dtype.is_float() {
        return match recipe.non_float_policy {
            NonFloatPolicy::CopyIt => writer.write_raw(name, &it.read_raw(name)?),
            NonFloatPolicy::Error => Err(Error::UnsupportedDtype {
                name: name.to_owned(),
                dtype: info.dtype.to_string(),
            }),
        };
    }
    if recipe.lambda == 0.0 {
        return writer.write_raw(name, &target.read_raw(name)?);
    }
    if recipe.lambda == 1.0 && base.is_none() {
        return writer.write_raw(name, &it.read_raw(name)?);
    }

    log::debug!("merging `{name}` ({} elements)", info.numel());
    let lambda = recipe.lambda;
    match recipe.method {
        MergeMethod::Linear => {
            let mut a = pt.load_tensor(name)?;
            let b = it.load_tensor(name)?;
            linear_in_place(&mut a.values, &b.values, lambda);
            writer.write_tensor(&a)
        }
        MergeMethod::Slerp => {
            let mut a = pt.load_tensor(name)?;
            let b = it.load_tensor(name)?;
            slerp_in_place(&mut a.values, &b.values, lambda, recipe.colinear_epsilon);
            writer.write_tensor(&a)
        }
        MergeMethod::TaskArith | MergeMethod::DareTies => {
            let mut delta = it.load_tensor(name)?;
            let mut pt_tensor = pt.load_tensor(name)?;
            delta_in_place(&mut delta.values, &pt_tensor.values);
            if recipe.method == MergeMethod::DareTies {
                dare_in_place(&mut delta.values, recipe.density, recipe.seed, name);
                trim_in_place(&mut delta.values, recipe.trim_fraction);
            }
            let mut target_tensor = match base {
                None => pt_tensor,
                Some(b) => {
                    pt_tensor.values = Vec::new();
                    b.load_tensor(name)?
                }
            };
            add_scaled_in_place(&mut target_tensor.values, &delta.values, lambda);
            writer.write_tensor(&target_tensor)
        }
    }
}
