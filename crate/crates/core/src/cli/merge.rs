use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::write_atomic;
use crate::error::{Error, Result};
use crate::merge::{
    merge_checkpoints, merge_onto_base, MergeMethod, MergeRecipe, NonFloatPolicy, RECIPE_METADATA_KEY,
};
use crate::tensor_store::{open_checkpoint, CheckpointManifest};

pub const DEFAULT_NAME_TEMPLATE: &str = "lambda_{lambda}.safetensors";
const DEFAULT_GRID: &str = "0:1:0.1";
const SWEEP_MANIFEST: &str = "sweep.json";

/// Recipe source: an optional JSON/YAML file, with flags overriding its fields.
#[derive(Debug, Clone, Default, Args)]
pub struct RecipeArgs {
    /// JSON or YAML recipe file.
    #[arg(long)]
    pub recipe: Option<PathBuf>,
    /// linear | slerp | task-arith | dare-ties
    #[arg(long)]
    pub method: Option<MergeMethod>,
    /// DARE keep probability in (0, 1].
    #[arg(long)]
    pub density: Option<f64>,
    /// Fraction of smallest-magnitude delta entries zeroed, in [0, 1).
    #[arg(long)]
    pub trim: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// SLERP falls back to linear when sin(omega) is below this.
    #[arg(long)]
    pub eps: Option<f64>,
    /// copy-it | error
    #[arg(long, value_name = "POLICY")]
    pub non_float: Option<NonFloatPolicy>,
}

impl RecipeArgs {
    /// Build the recipe for `lambda`, or for the file's lambda when `None`.
    pub fn resolve(&self, lambda: Option<f64>) -> Result<MergeRecipe> {
        let mut value = match &self.recipe {
            Some(path) => read_recipe_value(path)?,
            None => serde_json::json!({}),
        };
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::InvalidRecipe("recipe must be a mapping".into()))?;
        if let Some(m) = self.method {
            obj.insert("method".into(), Value::from(m.as_str()));
        }
        if !obj.contains_key("method") {
            return Err(Error::InvalidRecipe("no merge method given (--method or --recipe)".into()));
        }
        if let Some(l) = lambda {
            obj.insert("lambda".into(), Value::from(l));
        }
        if !obj.contains_key("lambda") {
            return Err(Error::InvalidRecipe("no lambda given (--lambda or --recipe)".into()));
        }
        let mut recipe: MergeRecipe =
            serde_json::from_value(value).map_err(|e| Error::InvalidRecipe(e.to_string()))?;
        if let Some(d) = self.density {
            recipe.density = d;
        }
        if let Some(t) = self.trim {
            recipe.trim_fraction = t;
        }
        if let Some(s) = self.seed {
            recipe.seed = s;
        }
        if let Some(e) = self.eps {
            recipe.colinear_epsilon = e;
        }
        if let Some(p) = self.non_float {
            recipe.non_float_policy = p;
        }
        recipe.validate()?;
        Ok(recipe)
    }
}

fn read_recipe_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let yaml = path.extension().is_some_and(|e| e == "yaml" || e == "yml");
    if yaml {
        serde_yaml::from_str(&text).map_err(|e| Error::InvalidRecipe(e.to_string()))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::InvalidRecipe(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct MergeArgs {
    #[arg(long)]
    pub pt: PathBuf,
    #[arg(long)]
    pub it: PathBuf,
    /// Apply the task vector it - pt to this backbone instead of pt.
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[command(flatten)]
    pub recipe: RecipeArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

struct Parents {
    pt: CheckpointManifest,
    it: CheckpointManifest,
    base: Option<CheckpointManifest>,
}

impl Parents {
    fn open(pt: &Path, it: &Path, base: Option<&Path>) -> Result<Self> {
        Ok(Self {
            pt: open_checkpoint(pt)?,
            it: open_checkpoint(it)?,
            base: base.map(open_checkpoint).transpose()?,
        })
    }

    fn merge(&self, recipe: &MergeRecipe, out: &Path) -> Result<CheckpointManifest> {
        match &self.base {
            Some(base) => merge_onto_base(base, &self.pt, &self.it, recipe, out),
            None => merge_checkpoints(&self.pt, &self.it, recipe, out),
        }
    }
}

pub(super) fn cmd_merge(args: &MergeArgs) -> Result<()> {
    let recipe = args.recipe.resolve(args.lambda)?;
    let parents = Parents::open(&args.pt, &args.it, args.base.as_deref())?;
    let manifest = parents.merge(&recipe, &args.out)?;
    let bytes = std::fs::metadata(&args.out)
        .map_err(|e| Error::io(&args.out, e))?
        .len();
    println!(
        "wrote {}: {} tensors, {} bytes",
        args.out.display(),
        manifest.len(),
        bytes
    );
    println!("recipe {}", recipe.to_canonical_json());
    println!("provenance sha256:{}", recipe.provenance_hash());
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub pt: PathBuf,
    #[arg(long)]
    pub it: PathBuf,
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[command(flatten)]
    pub recipe: RecipeArgs,
    /// Explicit lambda values, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    pub lambdas: Vec<f64>,
    /// Inclusive grid `start:stop:step` (default 0:1:0.1).
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Output file name; `{lambda}` is replaced by the lambda value.
    #[arg(long, default_value = DEFAULT_NAME_TEMPLATE)]
    pub name_template: String,
}

/// Inclusive `start:stop:step` grid. Values are rounded to 12 decimals so
/// 0.1-steps land on the nearest doubles of the decimal values.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("grid `{spec}` is not start:stop:step"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
        return Err(bad());
    }
    let steps = ((stop - start) / step + 1e-9).floor();
    if steps > 1e6 {
        return Err(Error::InvalidArgument(format!("grid `{spec}` has too many points")));
    }
    Ok((0..=steps as usize)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Sorted, duplicate-free lambdas from an explicit list or a grid.
pub fn resolve_lambdas(explicit: &[f64], grid: Option<&str>) -> Result<Vec<f64>> {
    let mut lambdas = if !explicit.is_empty() {
        explicit.to_vec()
    } else {
        parse_grid(grid.unwrap_or(DEFAULT_GRID))?
    };
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda {bad} is not finite")));
    }
    lambdas.sort_by(f64::total_cmp);
    if let Some(w) = lambdas.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!("lambda {} listed twice", w[0])));
    }
    Ok(lambdas)
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    lambda: f64,
    path: String,
    recipe: MergeRecipe,
    provenance_hash: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct SweepManifest {
    pt: String,
    it: String,
    base: Option<String>,
    entries: Vec<SweepEntry>,
    failed: Vec<f64>,
}

fn file_sha256(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    io::copy(&mut file, &mut hasher).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(hasher.finalize()))
}

/// An existing output counts as done when it parses and carries this recipe.
fn is_current(path: &Path, recipe: &MergeRecipe) -> bool {
    if !path.exists() {
        return false;
    }
    match open_checkpoint(path) {
        Ok(m) => m
            .metadata
            .get(RECIPE_METADATA_KEY)
            .and_then(|json| serde_json::from_str::<MergeRecipe>(json).ok())
            .is_some_and(|stored| stored.provenance_hash() == recipe.provenance_hash()),
        Err(_) => false,
    }
}

fn output_name(template: &str, lambda: f64) -> String {
    template.replace("{lambda}", &lambda.to_string())
}

pub(super) fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    if !args.name_template.contains("{lambda}") {
        return Err(Error::InvalidArgument(
            "--name-template must contain `{lambda}`".into(),
        ));
    }
    let lambdas = resolve_lambdas(&args.lambdas, args.grid.as_deref())?;
    let jobs: Vec<(f64, MergeRecipe, PathBuf)> = lambdas
        .iter()
        .map(|&l| {
            let recipe = args.recipe.resolve(Some(l))?;
            Ok((l, recipe, args.out_dir.join(output_name(&args.name_template, l))))
        })
        .collect::<Result<_>>()?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let parents = Parents::open(&args.pt, &args.it, args.base.as_deref())?;

    let outcomes: Vec<Result<SweepEntry>> = jobs
        .par_iter()
        .map(|(lambda, recipe, path)| {
            if is_current(path, recipe) {
                log::info!("lambda={lambda}: keeping {}", path.display());
            } else {
                parents.merge(recipe, path)?;
            }
            Ok(SweepEntry {
                lambda: *lambda,
                path: path.display().to_string(),
                recipe: recipe.clone(),
                provenance_hash: recipe.provenance_hash(),
                sha256: file_sha256(path)?,
            })
        })
        .collect();

    let mut entries = Vec::new();
    let mut failed = Vec::new();
    for ((lambda, _, _), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(entry) => {
                println!("lambda={} {} sha256:{}", entry.lambda, entry.path, entry.sha256);
                entries.push(entry);
            }
            Err(e) => {
                eprintln!("lambda={lambda} failed: {}", super::error_line(&e));
                failed.push(*lambda);
            }
        }
    }

    let manifest = SweepManifest {
        pt: args.pt.display().to_string(),
        it: args.it.display().to_string(),
        base: args.base.as_ref().map(|b| b.display().to_string()),
        entries,
        failed: failed.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Serialization(e.to_string()))?;
    write_atomic(&args.out_dir.join(SWEEP_MANIFEST), json + "\n")?;

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::SweepFailed(failed))
    }
}
