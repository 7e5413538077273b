mod common;

use std::collections::{BTreeMap, HashMap};

use frontier_merge::merge::{merge_checkpoints, MergeMethod, MergeRecipe};
use frontier_merge::tensor_store::{
    bf16_bits_to_f32, f16_bits_to_f32, f32_to_bf16_bits, f32_to_f16_bits, open_checkpoint, write_checkpoint,
    Dtype, TensorBuffer,
};
use frontier_merge::Error;
use half::{bf16, f16};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safetensors::tensor::{Dtype as StDtype, TensorView};
use safetensors::SafeTensors;

#[test]
fn conversions_match_half_crate() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let specials = [0.0f32, -0.0, 1.0, -1.0, f32::MIN_POSITIVE, 65504.0, 65520.0, 1e-8, 5.96e-8, f32::INFINITY, f32::NEG_INFINITY, f32::MAX];
    let randoms = (0..200_000).map(|_| f32::from_bits(rng.random::<u32>()));
    for v in specials.into_iter().chain(randoms) {
        if v.is_nan() {
            assert!(bf16_bits_to_f32(f32_to_bf16_bits(v)).is_nan());
            assert!(f16_bits_to_f32(f32_to_f16_bits(v)).is_nan());
            continue;
        }
        assert_eq!(f32_to_bf16_bits(v), bf16::from_f32(v).to_bits(), "bf16 {v:e}");
        assert_eq!(f32_to_f16_bits(v), f16::from_f32(v).to_bits(), "f16 {v:e}");
    }
    for bits in 0..=u16::MAX {
        let ours = bf16_bits_to_f32(bits);
        let theirs = bf16::from_bits(bits).to_f32();
        assert!(ours.to_bits() == theirs.to_bits() || (ours.is_nan() && theirs.is_nan()));
        let ours = f16_bits_to_f32(bits);
        let theirs = f16::from_bits(bits).to_f32();
        assert!(ours.to_bits() == theirs.to_bits() || (ours.is_nan() && theirs.is_nan()));
    }
}

#[test]
fn our_files_read_by_reference_parser() {
    let dir = tempfile::tempdir().unwrap();
    let path = common::write_toy(dir.path(), "a.safetensors", 1);
    let bytes = std::fs::read(&path).unwrap();
    let st = SafeTensors::deserialize(&bytes).unwrap();
    let ours = open_checkpoint(&path).unwrap();
    assert_eq!(st.len(), ours.len());
    for info in &ours.tensors {
        let view = st.tensor(&info.name).unwrap();
        assert_eq!(view.shape(), info.shape.as_slice());
        assert_eq!(view.data(), ours.read_raw(&info.name).unwrap().as_slice());
    }
    let (_, meta) = SafeTensors::read_metadata(&bytes).unwrap();
    assert_eq!(meta.metadata().as_ref().unwrap()["format"], "pt");
}

#[test]
fn reference_files_read_by_us() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w: Vec<f32> = common::random_values(&mut rng, 300, 3.0);
    let w_bytes: Vec<u8> = w.iter().flat_map(|v| bf16::from_f32(*v).to_le_bytes()).collect();
    let h_bytes: Vec<u8> = w.iter().flat_map(|v| f16::from_f32(*v).to_le_bytes()).collect();
    let f_bytes: Vec<u8> = w.iter().flat_map(|v| v.to_le_bytes()).collect();
    let ids: Vec<u8> = (0i32..10).flat_map(|i| i.to_le_bytes()).collect();
    let views = vec![
        ("w.bf16", TensorView::new(StDtype::BF16, vec![10, 30], &w_bytes).unwrap()),
        ("w.f16", TensorView::new(StDtype::F16, vec![300], &h_bytes).unwrap()),
        ("w.f32", TensorView::new(StDtype::F32, vec![3, 100], &f_bytes).unwrap()),
        ("ids", TensorView::new(StDtype::I32, vec![10], &ids).unwrap()),
    ];
    let meta: HashMap<String, String> = [("k".to_owned(), "v".to_owned())].into();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ref.safetensors");
    safetensors::serialize_to_file(views, &Some(meta), &path).unwrap();

    let m = open_checkpoint(&path).unwrap();
    assert_eq!(m.metadata["k"], "v");
    assert_eq!(m.tensor("ids").unwrap().dtype, Dtype::I32);
    let bf = m.load_tensor("w.bf16").unwrap();
    let hf = m.load_tensor("w.f16").unwrap();
    let ff = m.load_tensor("w.f32").unwrap();
    for (i, &x) in w.iter().enumerate() {
        assert_eq!(bf.values[i], bf16::from_f32(x).to_f32());
        assert_eq!(hf.values[i], f16::from_f32(x).to_f32());
        assert_eq!(ff.values[i], x);
    }
    assert_eq!(bf.shape, vec![10, 30]);
}

#[test]
fn write_then_read_round_trips_values() {
    let dir = tempfile::tempdir().unwrap();
    let tensors = common::toy_tensors(3);
    let path = dir.path().join("r.safetensors");
    let written = write_checkpoint(&path, tensors.clone(), &BTreeMap::new()).unwrap();
    assert_eq!(written.len(), tensors.len());
    let m = open_checkpoint(&path).unwrap();
    for t in &tensors {
        let back = m.load_tensor(&t.name).unwrap();
        assert_eq!(back.dtype, t.dtype);
        let expected: Vec<f32> = match t.dtype {
            Dtype::BF16 => t.values.iter().map(|v| bf16::from_f32(*v).to_f32()).collect(),
            _ => t.values.clone(),
        };
        assert_eq!(back.values, expected, "{}", t.name);
    }
}

fn write_shards(dir: &std::path::Path, seed: u64) -> std::path::PathBuf {
    let tensors = common::toy_tensors(seed);
    let (first, second) = tensors.split_at(2);
    write_checkpoint(dir.join("model-00001-of-00002.safetensors"), first.to_vec(), &BTreeMap::new()).unwrap();
    write_checkpoint(dir.join("model-00002-of-00002.safetensors"), second.to_vec(), &BTreeMap::new()).unwrap();
    let mut weight_map = serde_json::Map::new();
    for (i, t) in tensors.iter().enumerate() {
        let shard = if i < 2 { "model-00001-of-00002.safetensors" } else { "model-00002-of-00002.safetensors" };
        weight_map.insert(t.name.clone(), shard.into());
    }
    let index = serde_json::json!({"metadata": {"total_size": 1}, "weight_map": weight_map});
    let path = dir.join("model.safetensors.index.json");
    std::fs::write(&path, index.to_string()).unwrap();
    path
}

#[test]
fn sharded_checkpoints_merge_like_single_files() {
    let dir = tempfile::tempdir().unwrap();
    let pt_dir = dir.path().join("pt");
    let it_dir = dir.path().join("it");
    std::fs::create_dir_all(&pt_dir).unwrap();
    std::fs::create_dir_all(&it_dir).unwrap();
    let pt_index = write_shards(&pt_dir, 1);
    let it_index = write_shards(&it_dir, 2);
    let pt_single = common::write_toy(dir.path(), "pt.safetensors", 1);
    let it_single = common::write_toy(dir.path(), "it.safetensors", 2);

    let sharded = open_checkpoint(&pt_index).unwrap();
    assert_eq!(sharded.shards.len(), 2);
    assert_eq!(sharded.metadata["total_size"], "1");

    let recipe = MergeRecipe::new(MergeMethod::Slerp, 0.4);
    let a = merge_checkpoints(&sharded, &open_checkpoint(&it_index).unwrap(), &recipe, dir.path().join("a.safetensors")).unwrap();
    let b = merge_checkpoints(
        &open_checkpoint(&pt_single).unwrap(),
        &open_checkpoint(&it_single).unwrap(),
        &recipe,
        dir.path().join("b.safetensors"),
    )
    .unwrap();
    for t in &a.tensors {
        assert_eq!(a.read_raw(&t.name).unwrap(), b.read_raw(&t.name).unwrap(), "{}", t.name);
    }
}

#[test]
fn index_naming_missing_shard_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let index = serde_json::json!({"weight_map": {"w": "absent.safetensors"}});
    let path = dir.path().join("i.json");
    std::fs::write(&path, index.to_string()).unwrap();
    assert!(matches!(open_checkpoint(&path), Err(Error::Io { .. })));
}

#[test]
fn buffer_length_must_match_shape() {
    assert!(TensorBuffer::new("x", Dtype::F32, vec![2, 2], vec![0.0; 3]).is_err());
}
