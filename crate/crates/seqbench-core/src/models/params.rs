//! Parameter manifests, initialization, and flat views for gradient checks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;
use crate::tensor::Tensor;

use super::{Architecture, Cell, Connection, ModelSpec};

/// Initialization rule for one named tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
    Xavier,
    Zero,
}

/// Named tensors of one model instance. BTreeMap keeps every walk over the
/// set in name order, which is what makes training and checkpoints
/// reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub tensors: BTreeMap<String, Tensor>,
}

impl ParameterSet {
    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("missing parameter {name:?}")))
    }

    pub fn n_params(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }
}

fn push(out: &mut Vec<(String, Vec<usize>, Init)>, name: String, shape: &[usize], init: Init) {
    out.push((name, shape.to_vec(), init));
}

fn cell_entries(
    out: &mut Vec<(String, Vec<usize>, Init)>,
    prefix: &str,
    cell: Cell,
    input: usize,
    hidden: usize,
) {
    let gates: &[&str] = match cell {
        Cell::Rnn => &[""],
        Cell::Gru => &["_z", "_r", "_h"],
        Cell::Lstm => &["_i", "_f", "_g", "_o"],
    };
    for gate in gates {
        if cell == Cell::Rnn {
            push(out, format!("{prefix}w_x"), &[input, hidden], Init::Xavier);
            push(out, format!("{prefix}w_h"), &[hidden, hidden], Init::Xavier);
            push(out, format!("{prefix}b"), &[1, hidden], Init::Zero);
        } else {
            push(out, format!("{prefix}w{gate}"), &[input, hidden], Init::Xavier);
            push(out, format!("{prefix}u{gate}"), &[hidden, hidden], Init::Xavier);
            push(out, format!("{prefix}b{gate}"), &[1, hidden], Init::Zero);
        }
    }
}

/// The exact tensor names and shapes an architecture owns.
///
/// `n_ids` counts vocabulary rows including the PAD row 0, so embedding
/// tables can be indexed directly by code id.
pub fn manifest(spec: &ModelSpec, n_ids: usize) -> Result<Vec<(String, Vec<usize>, Init)>> {
    spec.validate()?;
    if n_ids < 2 {
        return Err(Error::Invalid(format!(
            "vocabulary must hold at least one real code, got {n_ids} ids"
        )));
    }
    let d = spec.embed_dim;
    let h = spec.hidden_size;
    let mut out = Vec::new();

    if spec.architecture == Architecture::Lr {
        push(&mut out, String::from("w"), &[n_ids, 1], Init::Xavier);
        push(&mut out, String::from("b"), &[1, 1], Init::Zero);
        return Ok(out);
    }

    push(&mut out, String::from("embed"), &[n_ids, d], Init::Xavier);
    match spec.architecture {
        Architecture::Recurrent { cell, connection } => match connection {
            Connection::Standard => cell_entries(&mut out, "layer0.", cell, d, h),
            Connection::Dilated => {
                for l in 0..spec.num_layers {
                    let input = if l == 0 { d } else { h };
                    cell_entries(&mut out, &format!("layer{l}."), cell, input, h);
                }
            }
            Connection::Bidirectional => {
                cell_entries(&mut out, "fwd.", cell, d, h);
                cell_entries(&mut out, "bwd.", cell, d, h);
            }
        },
        Architecture::Qrnn => {
            for gate in ["z", "f", "o"] {
                for j in 0..spec.qrnn_filter_width {
                    push(&mut out, format!("qrnn.{gate}_w{j}"), &[d, h], Init::Xavier);
                }
                push(&mut out, format!("qrnn.{gate}_b"), &[1, h], Init::Zero);
            }
        }
        Architecture::Tlstm => {
            cell_entries(&mut out, "cell.", Cell::Lstm, d, h);
            push(&mut out, String::from("cell.decay_w"), &[h, h], Init::Xavier);
            push(&mut out, String::from("cell.decay_b"), &[1, h], Init::Zero);
        }
        Architecture::Retain => {
            cell_entries(&mut out, "alpha.", Cell::Gru, d, h);
            cell_entries(&mut out, "beta.", Cell::Gru, d, h);
            push(&mut out, String::from("alpha_w"), &[h, 1], Init::Xavier);
            push(&mut out, String::from("alpha_b"), &[1, 1], Init::Zero);
            push(&mut out, String::from("beta_w"), &[h, d], Init::Xavier);
            push(&mut out, String::from("beta_b"), &[1, d], Init::Zero);
        }
        Architecture::Lr => unreachable!(),
    }
    push(&mut out, String::from("head_w"), &[spec.head_input(), 1], Init::Xavier);
    push(&mut out, String::from("head_b"), &[1, 1], Init::Zero);
    Ok(out)
}

/// Seeds a fresh parameter set. Each tensor draws from its own named
/// sub-stream, so adding or reordering tensors elsewhere in the manifest
/// never shifts another tensor's values.
pub fn init_params(spec: &ModelSpec, n_ids: usize, seed: u64) -> Result<ParameterSet> {
    let root = Rng::new(seed);
    let mut tensors = BTreeMap::new();
    for (name, shape, init) in manifest(spec, n_ids)? {
        let tensor = match init {
            Init::Zero => Tensor::zeros(&shape),
            Init::Xavier => {
                let (fan_in, fan_out) = (shape[0], shape[1]);
                let a = math::sqrt(6.0 / (fan_in + fan_out) as f64);
                let mut rng = root.stream(&format!("init.{name}"), 0);
                let data = (0..fan_in * fan_out).map(|_| rng.uniform(-a, a)).collect();
                Tensor::new(&shape, data)?
            }
        };
        tensors.insert(name, tensor);
    }
    Ok(ParameterSet { tensors })
}

/// All parameters as one row vector, in name order.
pub fn flatten(params: &ParameterSet) -> Tensor {
    let total = params.n_params();
    let mut data = Vec::with_capacity(total);
    for tensor in params.tensors.values() {
        data.extend_from_slice(tensor.data());
    }
    Tensor::new(&[1, total.max(1)], if total == 0 { alloc::vec![0.0] } else { data })
        .expect("flat parameter vector")
}

/// Rebuilds a parameter set shaped like `template` from a flat row vector.
pub fn unflatten(template: &ParameterSet, flat: &Tensor) -> Result<ParameterSet> {
    if flat.len() != template.n_params() {
        return Err(Error::Shape(format!(
            "unflatten: {} values for {} parameters",
            flat.len(),
            template.n_params()
        )));
    }
    let mut tensors = BTreeMap::new();
    let mut offset = 0;
    for (name, tensor) in &template.tensors {
        let n = tensor.len();
        let data = flat.data()[offset..offset + n].to_vec();
        tensors.insert(name.clone(), Tensor::new(tensor.shape(), data)?);
        offset += n;
    }
    Ok(ParameterSet { tensors })
}
