use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::dtype::{self, Dtype};
use super::TensorBuffer;
use crate::error::{Error, Result};

/// Header lengths above this are rejected before any allocation happens.
pub const MAX_HEADER_LEN: u64 = 100 * 1024 * 1024;

pub(crate) const METADATA_KEY: &str = "__metadata__";

/// Read granularity when streaming tensor bytes into working precision.
const READ_CHUNK: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: String,
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    /// Byte offsets into the data region of the owning shard.
    pub offset_begin: u64,
    pub offset_end: u64,
    /// Index into [`CheckpointManifest::shards`].
    pub shard: usize,
}

impl TensorInfo {
    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn byte_len(&self) -> u64 {
        self.offset_end - self.offset_begin
    }
}

/// One physical safetensors file contributing to a manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardFile {
    pub path: PathBuf,
    /// Absolute file offset where the data region begins (8 + header length).
    pub data_start: u64,
    pub data_len: u64,
}

/// Immutable index of the tensors in a (possibly sharded) checkpoint.
#[derive(Debug, Clone)]
pub struct CheckpointManifest {
    pub path: PathBuf,
    pub tensors: Vec<TensorInfo>,
    pub metadata: BTreeMap<String, String>,
    pub shards: Vec<ShardFile>,
    index: HashMap<String, usize>,
}

impl PartialEq for CheckpointManifest {
    fn eq(&self, other: &Self) -> bool {
        self.path == other.path
            && self.tensors == other.tensors
            && self.metadata == other.metadata
            && self.shards == other.shards
    }
}

/// Result of parsing one container header.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedHeader {
    pub header_len: u64,
    /// Tensors ordered by data offset, which is the order they were written in.
    pub tensors: Vec<TensorInfo>,
    pub metadata: BTreeMap<String, String>,
}

/// Validate the 8-byte prefix and the JSON header of a container.
///
/// `bytes` must hold at least the prefix and the header (the data region may
/// be absent); `file_len` is the full length of the file. Never panics: every
/// failure is a [`Error::MalformedHeader`].
pub fn parse_container(bytes: &[u8], file_len: u64) -> Result<ParsedHeader> {
    let malformed = |m: String| Error::MalformedHeader(m);

    if bytes.len() < 8 || file_len < 8 {
        return Err(malformed("file shorter than the 8-byte length prefix".into()));
    }
    let header_len = u64::from_le_bytes(bytes[..8].try_into().unwrap());
    if header_len > MAX_HEADER_LEN {
        return Err(malformed(format!("header length {header_len} exceeds limit")));
    }
    let data_start = 8 + header_len;
    if data_start > file_len {
        return Err(malformed(format!(
            "header length {header_len} runs past end of file ({file_len} bytes)"
        )));
    }
    let header_bytes = bytes
        .get(8..data_start as usize)
        .ok_or_else(|| malformed("header truncated".into()))?;
    let data_len = file_len - data_start;

    let text = std::str::from_utf8(header_bytes)
        .map_err(|e| malformed(format!("header is not UTF-8: {e}")))?;
    let root: serde_json::Map<String, Value> = serde_json::from_str(text.trim_end_matches(' '))
        .map_err(|e| malformed(format!("header is not a JSON object: {e}")))?;

    let mut metadata = BTreeMap::new();
    let mut tensors = Vec::with_capacity(root.len());
    for (name, entry) in root {
        if name == METADATA_KEY {
            let obj = entry
                .as_object()
                .ok_or_else(|| malformed("__metadata__ is not an object".into()))?;
            for (k, v) in obj {
                let v = v
                    .as_str()
                    .ok_or_else(|| malformed(format!("metadata value for `{k}` is not a string")))?;
                metadata.insert(k.clone(), v.to_owned());
            }
            continue;
        }
        tensors.push(parse_entry(name, &entry, data_len)?);
    }

    tensors.sort_by_key(|t| (t.offset_begin, t.offset_end));
    for pair in tensors.windows(2) {
        if pair[1].offset_begin < pair[0].offset_end {
            return Err(malformed(format!(
                "tensors `{}` and `{}` overlap",
                pair[0].name, pair[1].name
            )));
        }
    }

    Ok(ParsedHeader {
        header_len,
        tensors,
        metadata,
    })
}

fn parse_entry(name: String, entry: &Value, data_len: u64) -> Result<TensorInfo> {
    let malformed = |m: &str| Error::MalformedHeader(format!("tensor `{name}`: {m}"));
    let obj = entry.as_object().ok_or_else(|| malformed("entry is not an object"))?;
    if let Some(key) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "dtype" | "shape" | "data_offsets"))
    {
        return Err(malformed(&format!("unexpected key `{key}`")));
    }

    let dtype: Dtype = obj
        .get("dtype")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing dtype"))?
        .parse()
        .map_err(|_| malformed("unknown dtype"))?;

    let shape = obj
        .get("shape")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing shape"))?
        .iter()
        .map(|d| {
            d.as_u64()
                .and_then(|d| usize::try_from(d).ok())
                .ok_or_else(|| malformed("shape entries must be non-negative integers"))
        })
        .collect::<Result<Vec<usize>>>()?;

    let offsets = obj
        .get("data_offsets")
        .and_then(Value::as_array)
        .filter(|a| a.len() == 2)
        .ok_or_else(|| malformed("data_offsets must be a two-element array"))?;
    let begin = offsets[0]
        .as_u64()
        .ok_or_else(|| malformed("bad begin offset"))?;
    let end = offsets[1]
        .as_u64()
        .ok_or_else(|| malformed("bad end offset"))?;
    if end < begin {
        return Err(malformed("end offset precedes begin offset"));
    }
    if end > data_len {
        return Err(malformed(&format!(
            "span [{begin}, {end}) exceeds data region of {data_len} bytes"
        )));
    }

    let expected = shape
        .iter()
        .try_fold(dtype.byte_width() as u64, |acc, &d| acc.checked_mul(d as u64))
        .ok_or_else(|| malformed("element count overflows"))?;
    if end - begin != expected {
        return Err(malformed(&format!(
            "span holds {} bytes but shape {shape:?} of {dtype} needs {expected}",
            end - begin
        )));
    }

    Ok(TensorInfo {
        name,
        dtype,
        shape,
        offset_begin: begin,
        offset_end: end,
        shard: 0,
    })
}

impl CheckpointManifest {
    /// Open a checkpoint. A `.json` path is treated as a shard index file;
    /// anything else as a single safetensors container. No tensor data is read.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "json") {
            return super::shard::open_sharded(path);
        }
        let (shard, parsed) = read_container_header(path)?;
        Self::from_parts(
            path.to_path_buf(),
            vec![shard],
            vec![parsed.tensors],
            parsed.metadata,
        )
    }

    pub(crate) fn from_parts(
        path: PathBuf,
        shards: Vec<ShardFile>,
        per_shard: Vec<Vec<TensorInfo>>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut tensors = Vec::new();
        for (shard_idx, list) in per_shard.into_iter().enumerate() {
            tensors.extend(list.into_iter().map(|mut t| {
                t.shard = shard_idx;
                t
            }));
        }
        Self::from_tensors(path, shards, tensors, metadata)
    }

    pub(crate) fn from_tensors(
        path: PathBuf,
        shards: Vec<ShardFile>,
        tensors: Vec<TensorInfo>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(tensors.len());
        for (i, t) in tensors.iter().enumerate() {
            if index.insert(t.name.clone(), i).is_some() {
                return Err(Error::MalformedHeader(format!(
                    "tensor `{}` declared twice",
                    t.name
                )));
            }
        }
        Ok(Self {
            path,
            tensors,
            metadata,
            shards,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensor(&self, name: &str) -> Option<&TensorInfo> {
        self.index.get(name).map(|&i| &self.tensors[i])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.iter().map(|t| t.name.as_str())
    }

    fn info(&self, name: &str) -> Result<&TensorInfo> {
        self.tensor(name)
            .ok_or_else(|| Error::UnknownTensor(name.to_owned()))
    }

    fn open_at(&self, info: &TensorInfo) -> Result<File> {
        let shard = &self.shards[info.shard];
        let mut file = File::open(&shard.path).map_err(|e| Error::io(&shard.path, e))?;
        file.seek(SeekFrom::Start(shard.data_start + info.offset_begin))
            .map_err(|e| Error::io(&shard.path, e))?;
        Ok(file)
    }

    /// Raw stored bytes of one tensor.
    pub fn read_raw(&self, name: &str) -> Result<Vec<u8>> {
        let info = self.info(name)?;
        let mut file = self.open_at(info)?;
        let mut buf = vec![0u8; info.byte_len() as usize];
        file.read_exact(&mut buf)
            .map_err(|e| Error::io(&self.shards[info.shard].path, e))?;
        Ok(buf)
    }

    /// Load one tensor into F32 working precision.
    ///
    /// Reads in fixed-size chunks so that only the decoded output is resident.
    /// Integer and bool tensors load fine but report `is_mergeable() == false`.
    pub fn load_tensor(&self, name: &str) -> Result<TensorBuffer> {
        let info = self.info(name)?;
        let mut file = self.open_at(info)?;
        let width = info.dtype.byte_width();
        let mut values = Vec::with_capacity(info.numel());
        let mut chunk = vec![0u8; READ_CHUNK - READ_CHUNK % width];
        let mut remaining = info.byte_len() as usize;
        while remaining > 0 {
            let take = remaining.min(chunk.len());
            file.read_exact(&mut chunk[..take])
                .map_err(|e| Error::io(&self.shards[info.shard].path, e))?;
            dtype::decode_into(info.dtype, &chunk[..take], &mut values);
            remaining -= take;
        }
        Ok(TensorBuffer {
            name: info.name.clone(),
            dtype: info.dtype,
            shape: info.shape.clone(),
            values,
        })
    }
}

pub(crate) fn read_container_header(path: &Path) -> Result<(ShardFile, ParsedHeader)> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let file_len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut prefix = [0u8; 8];
    if file_len < 8 {
        return Err(Error::MalformedHeader(
            "file shorter than the 8-byte length prefix".into(),
        ));
    }
    file.read_exact(&mut prefix).map_err(|e| Error::io(path, e))?;
    let header_len = u64::from_le_bytes(prefix);
    if header_len > MAX_HEADER_LEN || 8 + header_len > file_len {
        // let the parser produce the precise message
        return Err(parse_container(&prefix, file_len).unwrap_err());
    }
    let mut bytes = vec![0u8; 8 + header_len as usize];
    bytes[..8].copy_from_slice(&prefix);
    file.read_exact(&mut bytes[8..])
        .map_err(|e| Error::io(path, e))?;
    let parsed = parse_container(&bytes, file_len)?;
    let data_start = 8 + parsed.header_len;
    Ok((
        ShardFile {
            path: path.to_path_buf(),
            data_start,
            data_len: file_len - data_start,
        },
        parsed,
    ))
}

/// Open a checkpoint file (or shard index) and return its manifest.
pub fn open_checkpoint(path: impl AsRef<Path>) -> Result<CheckpointManifest> {
    CheckpointManifest::open(path)
}

/// Load one named tensor from a manifest in working precision.
pub fn load_tensor(manifest: &CheckpointManifest, name: &str) -> Result<TensorBuffer> {
    manifest.load_tensor(name)
}
