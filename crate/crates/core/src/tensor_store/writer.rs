use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::dtype::{self, Dtype};
use super::manifest::{CheckpointManifest, METADATA_KEY};
use super::TensorBuffer;
use crate::error::{Error, Result};

/// Name, dtype and shape of a tensor slot in a file being written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorLayout {
    pub name: String,
    pub dtype: Dtype,
    pub shape: Vec<usize>,
}

impl TensorLayout {
    pub fn new(name: impl Into<String>, dtype: Dtype, shape: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            dtype,
            shape,
        }
    }

    fn byte_len(&self) -> u64 {
        self.shape.iter().product::<usize>() as u64 * self.dtype.byte_width() as u64
    }
}

/// Serialize the JSON header for `layout`. Keys are sorted (serde_json's
/// default map is ordered) and the result is space-padded to 8 bytes.
pub(crate) fn encode_header(
    layout: &[TensorLayout],
    metadata: &BTreeMap<String, String>,
) -> Result<Vec<u8>> {
    let mut root = Map::new();
    if !metadata.is_empty() {
        root.insert(METADATA_KEY.to_owned(), json!(metadata));
    }
    let mut seen = HashSet::with_capacity(layout.len());
    let mut offset = 0u64;
    for t in layout {
        if t.name == METADATA_KEY || !seen.insert(t.name.as_str()) {
            return Err(Error::DuplicateTensor(t.name.clone()));
        }
        let end = offset + t.byte_len();
        root.insert(
            t.name.clone(),
            json!({
                "dtype": t.dtype.as_str(),
                "shape": t.shape,
                "data_offsets": [offset, end],
            }),
        );
        offset = end;
    }
    let mut bytes = serde_json::to_vec(&Value::Object(root))
        .map_err(|e| Error::Serialization(e.to_string()))?;
    let pad = (8 - bytes.len() % 8) % 8;
    bytes.extend(std::iter::repeat_n(b' ', pad));
    Ok(bytes)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Streaming writer for a checkpoint whose layout is known up front.
///
/// The header goes out first; tensors are then appended one at a time in
/// layout order. Output lands in `<path>.partial` and is renamed into place by
/// [`CheckpointWriter::finish`], so an interrupted write never leaves a file
/// that looks complete.
pub struct CheckpointWriter {
    out: BufWriter<File>,
    layout: Vec<TensorLayout>,
    next: usize,
    path: PathBuf,
    partial: PathBuf,
    scratch: Vec<u8>,
}

impl CheckpointWriter {
    pub fn create(
        path: impl AsRef<Path>,
        layout: Vec<TensorLayout>,
        metadata: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let header = encode_header(&layout, metadata)?;
        let partial = sibling(&path, ".partial");
        let file = File::create(&partial).map_err(|e| Error::io(&partial, e))?;
        let mut out = BufWriter::with_capacity(1 << 20, file);
        out.write_all(&(header.len() as u64).to_le_bytes())
            .and_then(|_| out.write_all(&header))
            .map_err(|e| Error::io(&partial, e))?;
        Ok(Self {
            out,
            layout,
            next: 0,
            path,
            partial,
            scratch: Vec::new(),
        })
    }

    fn expect_next(&self, name: &str) -> Result<&TensorLayout> {
        let slot = self.layout.get(self.next).ok_or_else(|| {
            Error::InvalidArgument(format!("tensor `{name}` written past the end of the layout"))
        })?;
        if slot.name != name {
            return Err(Error::InvalidArgument(format!(
                "expected tensor `{}` next, got `{name}`",
                slot.name
            )));
        }
        Ok(slot)
    }

    /// Append the next tensor, narrowing to the layout's dtype.
    pub fn write_tensor(&mut self, tensor: &TensorBuffer) -> Result<()> {
        let slot = self.expect_next(&tensor.name)?;
        if slot.shape != tensor.shape {
            return Err(Error::ShapeMismatch {
                name: tensor.name.clone(),
                left: slot.shape.clone(),
                right: tensor.shape.clone(),
            });
        }
        let dtype = slot.dtype;
        // encode in bounded pieces so the byte copy never rivals the tensor in size
        const PIECE: usize = 1 << 18;
        for piece in tensor.values.chunks(PIECE) {
            self.scratch.clear();
            dtype::encode_into(dtype, piece, &mut self.scratch);
            self.out
                .write_all(&self.scratch)
                .map_err(|e| Error::io(&self.partial, e))?;
        }
        self.next += 1;
        Ok(())
    }

    /// Append the next tensor's stored bytes verbatim.
    pub fn write_raw(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let slot = self.expect_next(name)?;
        if slot.byte_len() != bytes.len() as u64 {
            return Err(Error::InvalidArgument(format!(
                "tensor `{name}`: {} raw bytes for a {}-byte slot",
                bytes.len(),
                slot.byte_len()
            )));
        }
        self.out
            .write_all(bytes)
            .map_err(|e| Error::io(&self.partial, e))?;
        self.next += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<CheckpointManifest> {
        if self.next != self.layout.len() {
            return Err(Error::InvalidArgument(format!(
                "only {} of {} tensors written",
                self.next,
                self.layout.len()
            )));
        }
        let file = self
            .out
            .into_inner()
            .map_err(|e| Error::io(&self.partial, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&self.partial, e))?;
        drop(file);
        fs::rename(&self.partial, &self.path).map_err(|e| Error::io(&self.path, e))?;
        CheckpointManifest::open(&self.path)
    }
}

/// Write a checkpoint from a stream of tensors, in stream order.
///
/// Tensor data is spilled to a scratch file while the layout accumulates, then
/// the header and data are stitched together; at most one tensor is resident.
/// Identical inputs give byte-identical files.
pub fn write_checkpoint<I>(
    path: impl AsRef<Path>,
    tensors: I,
    metadata: &BTreeMap<String, String>,
) -> Result<CheckpointManifest>
where
    I: IntoIterator<Item = TensorBuffer>,
{
    let path = path.as_ref();
    let spill_path = sibling(path, ".data");
    let result = write_via_spill(path, &spill_path, tensors, metadata);
    let _ = fs::remove_file(&spill_path);
    result
}

fn write_via_spill<I>(
    path: &Path,
    spill_path: &Path,
    tensors: I,
    metadata: &BTreeMap<String, String>,
) -> Result<CheckpointManifest>
where
    I: IntoIterator<Item = TensorBuffer>,
{
    let spill = File::create(spill_path).map_err(|e| Error::io(spill_path, e))?;
    let mut spill = BufWriter::with_capacity(1 << 20, spill);
    let mut layout = Vec::new();
    let mut seen = HashSet::new();
    let mut scratch = Vec::new();
    for tensor in tensors {
        tensor.check_len()?;
        if !seen.insert(tensor.name.clone()) {
            return Err(Error::DuplicateTensor(tensor.name));
        }
        for piece in tensor.values.chunks(1 << 18) {
            scratch.clear();
            dtype::encode_into(tensor.dtype, piece, &mut scratch);
            spill
                .write_all(&scratch)
                .map_err(|e| Error::io(spill_path, e))?;
        }
        layout.push(TensorLayout::new(tensor.name, tensor.dtype, tensor.shape));
    }
    spill.flush().map_err(|e| Error::io(spill_path, e))?;
    drop(spill);

    let header = encode_header(&layout, metadata)?;
    let partial = sibling(path, ".partial");
    let file = File::create(&partial).map_err(|e| Error::io(&partial, e))?;
    let mut out = BufWriter::with_capacity(1 << 20, file);
    let mut data = File::open(spill_path).map_err(|e| Error::io(spill_path, e))?;
    out.write_all(&(header.len() as u64).to_le_bytes())
        .and_then(|_| out.write_all(&header))
        .and_then(|_| io::copy(&mut data, &mut out).map(|_| ()))
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&partial, e))?;
    drop(out);
    fs::rename(&partial, path).map_err(|e| Error::io(path, e))?;
    CheckpointManifest::open(path)
}
