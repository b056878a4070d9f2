//! Model checkpoints: a named-tensor container that restores bit-exact
//! weights. One JSON object tagged `seqbench-model/1` holding the model
//! shape and every parameter tensor with its dims and full 64-bit data.
//! serde_json prints floats in shortest-roundtrip form and (with its
//! `float_roundtrip` feature, enabled in Cargo.toml) parses them back
//! exactly, so save -> load is the identity on every finite f64 bit
//! pattern.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use seqbench_core::models::{Architecture, ModelSpec, ParameterSet};
use seqbench_core::Tensor;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_SCHEMA: &str = "seqbench-model/1";

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    schema: String,
    arch: String,
    embed_dim: usize,
    hidden_size: usize,
    num_layers: usize,
    qrnn_filter_width: usize,
    /// Embedding rows, i.e. vocabulary ids including the padding row.
    n_ids: usize,
    tensors: BTreeMap<String, TensorEntry>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    shape: Vec<usize>,
    data: Vec<f64>,
}

pub fn save_checkpoint(
    path: &Path,
    spec: &ModelSpec,
    n_ids: usize,
    params: &ParameterSet,
) -> Result<()> {
    let mut tensors = BTreeMap::new();
    for (name, tensor) in &params.tensors {
        tensor.check_finite(name)?;
        tensors.insert(
            name.clone(),
            TensorEntry { shape: tensor.shape().to_vec(), data: tensor.data().to_vec() },
        );
    }
    let file = CheckpointFile {
        schema: MODEL_SCHEMA.into(),
        arch: spec.architecture.name().into(),
        embed_dim: spec.embed_dim,
        hidden_size: spec.hidden_size,
        num_layers: spec.num_layers,
        qrnn_filter_width: spec.qrnn_filter_width,
        n_ids,
        tensors,
    };
    let out = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer(BufWriter::new(out), &file)
        .map_err(|e| Error::format(path, format!("writing checkpoint: {e}")))
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelSpec, usize, ParameterSet)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let parsed: CheckpointFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::format(path, format!("bad checkpoint: {e}")))?;
    if parsed.schema != MODEL_SCHEMA {
        return Err(Error::format(
            path,
            format!("unknown schema {:?}, expected {MODEL_SCHEMA:?}", parsed.schema),
        ));
    }
    let architecture = Architecture::parse(&parsed.arch).map_err(|e| Error::format(path, e))?;
    let spec = ModelSpec {
        architecture,
        embed_dim: parsed.embed_dim,
        hidden_size: parsed.hidden_size,
        num_layers: parsed.num_layers,
        qrnn_filter_width: parsed.qrnn_filter_width,
    };
    spec.validate().map_err(|e| Error::format(path, e))?;
    let mut tensors = BTreeMap::new();
    for (name, entry) in parsed.tensors {
        let tensor = Tensor::new(&entry.shape, entry.data)
            .map_err(|e| Error::format(path, format!("tensor {name:?}: {e}")))?;
        tensors.insert(name, tensor);
    }
    Ok((spec, parsed.n_ids, ParameterSet { tensors }))
}
