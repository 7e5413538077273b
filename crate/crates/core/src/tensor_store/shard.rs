use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::Value;

use super::manifest::{read_container_header, CheckpointManifest};
use crate::error::{Error, Result};

/// `model.safetensors.index.json`: tensor name -> shard file name.
#[derive(Debug, Deserialize)]
struct ShardIndex {
    #[serde(default)]
    metadata: BTreeMap<String, Value>,
    weight_map: IndexMap<String, String>,
}

/// Open a multi-shard checkpoint as one logical manifest. Tensor order follows
/// the index file; shard paths resolve relative to the index's directory.
pub(crate) fn open_sharded(index_path: &Path) -> Result<CheckpointManifest> {
    let text = fs::read_to_string(index_path).map_err(|e| Error::io(index_path, e))?;
    let index: ShardIndex = serde_json::from_str(&text)
        .map_err(|e| Error::MalformedHeader(format!("shard index: {e}")))?;
    let dir = index_path.parent().unwrap_or_else(|| Path::new("."));

    let mut shard_ids: IndexMap<&str, usize> = IndexMap::new();
    for file in index.weight_map.values() {
        let next = shard_ids.len();
        shard_ids.entry(file.as_str()).or_insert(next);
    }

    let mut shards = Vec::with_capacity(shard_ids.len());
    let mut by_name = HashMap::new();
    for (file, &id) in &shard_ids {
        let (shard, parsed) = read_container_header(&dir.join(file))?;
        for t in parsed.tensors {
            match index.weight_map.get(&t.name) {
                Some(owner) if owner == file => {
                    by_name.insert(t.name.clone(), (id, t));
                }
                _ => {
                    return Err(Error::MalformedHeader(format!(
                        "shard `{file}` holds `{}`, which the index does not assign to it",
                        t.name
                    )))
                }
            }
        }
        shards.push(shard);
    }

    let mut tensors = Vec::with_capacity(index.weight_map.len());
    for (name, file) in &index.weight_map {
        let (id, mut info) = by_name.remove(name).ok_or_else(|| {
            Error::MalformedHeader(format!("index lists `{name}` but shard `{file}` lacks it"))
        })?;
        info.shard = id;
        tensors.push(info);
    }

    let metadata = index
        .metadata
        .into_iter()
        .map(|(k, v)| match v {
            Value::String(s) => (k, s),
            other => (k, other.to_string()),
        })
        .collect();
    CheckpointManifest::from_tensors(index_path.to_path_buf(), shards, tensors, metadata)
}
