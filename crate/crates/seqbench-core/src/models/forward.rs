//! Binding parameters onto a tape and running whole batches.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::Batch;
use crate::error::{Error, Result};
use crate::tape::{Tape, Var};

use super::cells::{CellVars, LstmVars};
use super::retain::{retain_forward, RetainVars};
use super::runners::{
    qrnn_forward, run_bidirectional, run_dilated, run_standard, run_tlstm, QrnnVars,
};
use super::{Architecture, Cell, Connection, ModelSpec, ParameterSet};

/// Parameter tensors registered on a tape, addressable by name.
#[derive(Debug)]
pub struct BoundModel {
    vars: BTreeMap<String, Var>,
}

impl BoundModel {
    pub fn var(&self, name: &str) -> Result<Var> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("model has no parameter {name:?}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, Var)> {
        self.vars.iter().map(|(name, &var)| (name, var))
    }
}

/// Registers every parameter tensor as a tape leaf, in name order.
pub fn bind(tape: &mut Tape, params: &ParameterSet) -> BoundModel {
    let vars = params
        .tensors
        .iter()
        .map(|(name, tensor)| (name.clone(), tape.leaf(tensor.clone())))
        .collect();
    BoundModel { vars }
}

fn bind_cell(bound: &BoundModel, prefix: &str, cell: Cell) -> Result<CellVars> {
    let v = |name: &str| bound.var(&format!("{prefix}{name}"));
    Ok(match cell {
        Cell::Rnn => CellVars::Rnn { w_x: v("w_x")?, w_h: v("w_h")?, b: v("b")? },
        Cell::Gru => CellVars::Gru {
            w_z: v("w_z")?,
            u_z: v("u_z")?,
            b_z: v("b_z")?,
            w_r: v("w_r")?,
            u_r: v("u_r")?,
            b_r: v("b_r")?,
            w_h: v("w_h")?,
            u_h: v("u_h")?,
            b_h: v("b_h")?,
        },
        Cell::Lstm => CellVars::Lstm(bind_lstm(bound, prefix)?),
    })
}

fn bind_lstm(bound: &BoundModel, prefix: &str) -> Result<LstmVars> {
    let v = |name: &str| bound.var(&format!("{prefix}{name}"));
    Ok(LstmVars {
        w_i: v("w_i")?,
        u_i: v("u_i")?,
        b_i: v("b_i")?,
        w_f: v("w_f")?,
        u_f: v("u_f")?,
        b_f: v("b_f")?,
        w_g: v("w_g")?,
        u_g: v("u_g")?,
        b_g: v("b_g")?,
        w_o: v("w_o")?,
        u_o: v("u_o")?,
        b_o: v("b_o")?,
    })
}

/// Mean-of-code-embeddings visit vectors, one [B x d] matrix per step.
/// Padded visits embed to the zero vector.
fn embed_steps(tape: &mut Tape, embed: Var, batch: &Batch) -> Result<Vec<Var>> {
    let mut steps = Vec::with_capacity(batch.steps);
    for t in 0..batch.steps {
        let bags: Vec<Vec<usize>> = (0..batch.size)
            .map(|b| batch.codes_at(b, t).iter().map(|&id| id as usize).collect())
            .collect();
        steps.push(tape.embed_bag(embed, &bags, true)?);
    }
    Ok(steps)
}

fn step_masks(batch: &Batch) -> Vec<Vec<f64>> {
    (0..batch.steps)
        .map(|t| (0..batch.size).map(|b| batch.visit_mask[b * batch.steps + t]).collect())
        .collect()
}

fn last_indices(batch: &Batch) -> Vec<usize> {
    (0..batch.size).map(|b| batch.last_real_index(b)).collect()
}

fn delta_columns(batch: &Batch) -> Vec<Vec<f64>> {
    (0..batch.steps)
        .map(|t| (0..batch.size).map(|b| batch.delta_at(b, t)).collect())
        .collect()
}

/// Presence bag per row: every distinct code id across the row's real visits.
fn presence_bags(batch: &Batch) -> Vec<Vec<usize>> {
    (0..batch.size)
        .map(|b| {
            let mut ids: Vec<usize> = (0..batch.steps)
                .flat_map(|t| batch.codes_at(b, t).iter().map(|&id| id as usize))
                .collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect()
}

/// Runs the architecture over one batch and returns the [B x 1] logits.
pub fn forward_logits(
    tape: &mut Tape,
    bound: &BoundModel,
    spec: &ModelSpec,
    batch: &Batch,
) -> Result<Var> {
    spec.validate()?;
    if spec.architecture == Architecture::Lr {
        let bag = tape.embed_bag(bound.var("w")?, &presence_bags(batch), false)?;
        return tape.add_row_bias(bag, bound.var("b")?);
    }

    let xs = embed_steps(tape, bound.var("embed")?, batch)?;
    let last = last_indices(batch);
    let h = spec.hidden_size;
    let hidden = match spec.architecture {
        Architecture::Recurrent { cell, connection } => match connection {
            Connection::Standard => {
                let vars = bind_cell(bound, "layer0.", cell)?;
                run_standard(tape, &vars, &xs, &last, h)?
            }
            Connection::Dilated => {
                let layers: Vec<CellVars> = (0..spec.num_layers)
                    .map(|l| bind_cell(bound, &format!("layer{l}."), cell))
                    .collect::<Result<_>>()?;
                run_dilated(tape, &layers, &xs, &last, h)?
            }
            Connection::Bidirectional => {
                let fwd = bind_cell(bound, "fwd.", cell)?;
                let bwd = bind_cell(bound, "bwd.", cell)?;
                run_bidirectional(tape, &fwd, &bwd, &xs, &last, &step_masks(batch), h)?
            }
        },
        Architecture::Qrnn => {
            let gate = |g: &str| -> Result<(Vec<Var>, Var)> {
                let ws = (0..spec.qrnn_filter_width)
                    .map(|j| bound.var(&format!("qrnn.{g}_w{j}")))
                    .collect::<Result<_>>()?;
                Ok((ws, bound.var(&format!("qrnn.{g}_b"))?))
            };
            let (z_w, z_b) = gate("z")?;
            let (f_w, f_b) = gate("f")?;
            let (o_w, o_b) = gate("o")?;
            let vars = QrnnVars { z_w, z_b, f_w, f_b, o_w, o_b };
            qrnn_forward(tape, &vars, &xs, &last, h)?
        }
        Architecture::Tlstm => {
            let lstm = bind_lstm(bound, "cell.")?;
            let decay_w = bound.var("cell.decay_w")?;
            let decay_b = bound.var("cell.decay_b")?;
            run_tlstm(tape, &lstm, decay_w, decay_b, &xs, &delta_columns(batch), &last, h)?
        }
        Architecture::Retain => {
            let vars = RetainVars {
                alpha_cell: bind_cell(bound, "alpha.", Cell::Gru)?,
                beta_cell: bind_cell(bound, "beta.", Cell::Gru)?,
                alpha_w: bound.var("alpha_w")?,
                alpha_b: bound.var("alpha_b")?,
                beta_w: bound.var("beta_w")?,
                beta_b: bound.var("beta_b")?,
                head_w: bound.var("head_w")?,
                head_b: bound.var("head_b")?,
            };
            let out =
                retain_forward(tape, &vars, &xs, &batch.visit_mask, &step_masks(batch), h)?;
            return Ok(out.logits);
        }
        // LR returned above.
        Architecture::Lr => unreachable!(),
    };
    tape.affine(hidden, bound.var("head_w")?, bound.var("head_b")?)
}

/// Mean BCE over the batch, from logits.
pub fn batch_loss(
    tape: &mut Tape,
    bound: &BoundModel,
    spec: &ModelSpec,
    batch: &Batch,
) -> Result<Var> {
    let logits = forward_logits(tape, bound, spec, batch)?;
    tape.mean_bce_with_logits(logits, &batch.labels)
}

/// Forward-only probabilities for one batch on a fresh tape.
pub fn predict_probs(spec: &ModelSpec, params: &ParameterSet, batch: &Batch) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let bound = bind(&mut tape, params);
    let logits = forward_logits(&mut tape, &bound, spec, batch)?;
    let probs = tape.sigmoid(logits)?;
    Ok(tape.value(probs).data().to_vec())
}

/// sigma(hidden . w + b): probability head over an encoder state.
pub fn classify_head(tape: &mut Tape, hidden: Var, w: Var, b: Var) -> Result<Var> {
    let logits = tape.affine(hidden, w, b)?;
    tape.sigmoid(logits)
}

/// Averages two probability vectors elementwise.
pub fn ensemble_probs(p_a: &[f64], p_b: &[f64]) -> Result<Vec<f64>> {
    if p_a.len() != p_b.len() {
        return Err(Error::Shape(format!(
            "ensemble: {} vs {} probabilities",
            p_a.len(),
            p_b.len()
        )));
    }
    for &p in p_a.iter().chain(p_b) {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Invalid(format!("ensemble probability {p} outside [0, 1]")));
        }
    }
    Ok(p_a.iter().zip(p_b).map(|(a, b)| 0.5 * (a + b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{batch_visits, PatientRecord, Visit};
    use crate::models::init_params;
    use crate::rng::Rng;
    use crate::tensor::Tensor;

    fn record(id: &str, label: u8, visits: &[(u32, &[u32])]) -> PatientRecord {
        PatientRecord {
            patient_id: id.into(),
            label,
            visits: visits
                .iter()
                .map(|&(dt, codes)| Visit { delta_days: dt, codes: codes.to_vec() })
                .collect(),
        }
    }

    fn toy_batch() -> Batch {
        let records = [
            record("a", 1, &[(0, &[1, 2]), (12, &[3]), (30, &[2, 4])]),
            record("b", 0, &[(0, &[4]), (45, &[1, 3])]),
        ];
        batch_visits(&records, 2).unwrap().remove(0)
    }

    fn random_batch(rng: &mut Rng, n: usize, vocab: u32) -> Batch {
        let records: Vec<PatientRecord> = (0..n)
            .map(|i| {
                let visits: Vec<Visit> = (0..1 + rng.below(4))
                    .map(|t| Visit {
                        delta_days: if t == 0 { 0 } else { 1 + rng.below(60) as u32 },
                        codes: (0..1 + rng.below(3))
                            .map(|_| 1 + rng.below(vocab as u64 - 1) as u32)
                            .collect(),
                    })
                    .collect();
                PatientRecord {
                    patient_id: alloc::format!("p{i}"),
                    label: u8::from(rng.bernoulli(0.5)),
                    visits,
                }
            })
            .collect();
        batch_visits(&records, n).unwrap().remove(0)
    }

    #[test]
    fn every_architecture_emits_finite_probabilities() {
        let mut rng = Rng::new(51);
        let batch = random_batch(&mut rng, 5, 21);
        for arch in Architecture::all() {
            let spec = ModelSpec::new(arch, 4, 5);
            let params = init_params(&spec, 21, 9).unwrap();
            let probs = predict_probs(&spec, &params, &batch).unwrap();
            assert_eq!(probs.len(), 5, "{}", arch.name());
            for &p in &probs {
                assert!(p > 0.0 && p < 1.0, "{}: {p}", arch.name());
            }
        }
    }

    #[test]
    fn appending_padded_visits_changes_nothing() {
        // Quantified over architectures: mask invariance of the forward pass.
        let records = [
            record("a", 1, &[(0, &[1, 2]), (12, &[3])]),
            record("b", 0, &[(0, &[4]), (45, &[1, 3]), (10, &[2])]),
        ];
        let long = [
            records[0].clone(),
            record("c", 0, &[(0, &[5]), (3, &[6]), (9, &[7]), (2, &[8]), (1, &[9])]),
        ];
        // Batching `records` alone pads to T=3; alongside the 5-visit row
        // it pads to T=5.
        let short_batch = batch_visits(&records, 2).unwrap().remove(0);
        let long_batch = batch_visits(&long, 2).unwrap().remove(0);
        assert_eq!(short_batch.steps, 3);
        assert_eq!(long_batch.steps, 5);

        for arch in Architecture::all() {
            let spec = ModelSpec::new(arch, 4, 5);
            let params = init_params(&spec, 21, 13).unwrap();
            let short = predict_probs(&spec, &params, &short_batch).unwrap();
            let long = predict_probs(&spec, &params, &long_batch).unwrap();
            assert_eq!(short[0], long[0], "{}", arch.name());
        }
    }

    #[test]
    fn lr_ignores_code_and_visit_order() {
        let spec = ModelSpec::new(Architecture::Lr, 4, 5);
        let params = init_params(&spec, 21, 17).unwrap();
        let a = [record("a", 1, &[(0, &[1, 2]), (12, &[3, 7])])];
        let b = [record("a", 1, &[(0, &[7, 3]), (12, &[2, 1])])];
        // Same bag, repeated mention: presence semantics.
        let c = [record("a", 1, &[(0, &[1]), (5, &[2, 3]), (2, &[7, 1, 3])])];
        let pa = predict_probs(&spec, &params, &batch_visits(&a, 1).unwrap()[0]).unwrap();
        let pb = predict_probs(&spec, &params, &batch_visits(&b, 1).unwrap()[0]).unwrap();
        let pc = predict_probs(&spec, &params, &batch_visits(&c, 1).unwrap()[0]).unwrap();
        assert_eq!(pa, pb);
        assert_eq!(pa, pc);
    }

    #[test]
    fn lr_single_code_arithmetic() {
        let spec = ModelSpec::new(Architecture::Lr, 4, 5);
        let mut params = init_params(&spec, 21, 1).unwrap();
        let mut w = Tensor::zeros(&[21, 1]);
        w.set(7, 0, 2.0);
        params.tensors.insert("w".into(), w);
        params.tensors.insert("b".into(), Tensor::new(&[1, 1], alloc::vec![-1.0]).unwrap());
        let records = [record("a", 0, &[(0, &[7])])];
        let probs =
            predict_probs(&spec, &params, &batch_visits(&records, 1).unwrap()[0]).unwrap();
        let expect = crate::math::sigmoid(1.0);
        assert!((probs[0] - expect).abs() < 1e-12);
        assert!((expect - 0.73106).abs() < 1e-5);
    }

    #[test]
    fn batch_loss_is_finite_and_improves_toward_labels() {
        let batch = toy_batch();
        let spec = ModelSpec::new(Architecture::parse("GRU").unwrap(), 4, 5);
        let params = init_params(&spec, 21, 3).unwrap();
        let mut tape = Tape::new();
        let bound = bind(&mut tape, &params);
        let loss = batch_loss(&mut tape, &bound, &spec, &batch).unwrap();
        let value = tape.value(loss).data()[0];
        assert!(value.is_finite() && value > 0.0);
        tape.backward(loss).unwrap();
        // Gradients reach the embedding and the head.
        let embed_grad = tape.grad(bound.var("embed").unwrap()).unwrap();
        assert!(embed_grad.iter().any(|&g| g != 0.0));
        let head_grad = tape.grad(bound.var("head_w").unwrap()).unwrap();
        assert!(head_grad.iter().any(|&g| g != 0.0));
    }

    #[test]
    fn classify_head_basics() {
        let mut tape = Tape::new();
        let hidden = tape.leaf(Tensor::new(&[2, 2], alloc::vec![0.0, 0.0, 1.0, 2.0]).unwrap());
        let w = tape.leaf(Tensor::new(&[2, 1], alloc::vec![0.5, -0.75]).unwrap());
        let b = tape.leaf(Tensor::zeros(&[1, 1]));
        let p = classify_head(&mut tape, hidden, w, b).unwrap();
        let got = tape.value(p).data();
        assert_eq!(got[0], 0.5);
        let expect = crate::math::sigmoid(0.5 * 1.0 - 0.75 * 2.0);
        assert!((got[1] - expect).abs() < 1e-12);
        assert!(got[1] < got[0]);
    }

    #[test]
    fn ensemble_mean_rules() {
        assert_eq!(ensemble_probs(&[0.2], &[0.8]).unwrap(), alloc::vec![0.5]);
        assert_eq!(ensemble_probs(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), alloc::vec![0.3, 0.7]);
        let mixed = ensemble_probs(&[0.1, 0.9], &[0.5, 0.3]).unwrap();
        for (i, &(lo, hi)) in [(0.1, 0.5), (0.3, 0.9)].iter().enumerate() {
            assert!(mixed[i] >= lo && mixed[i] <= hi);
        }
        assert!(ensemble_probs(&[0.5], &[0.5, 0.5]).is_err());
        assert!(ensemble_probs(&[1.5], &[0.5]).is_err());
    }

    #[test]
    fn unknown_code_id_errors() {
        let spec = ModelSpec::new(Architecture::parse("GRU").unwrap(), 4, 5);
        let params = init_params(&spec, 10, 3).unwrap();
        let records = [record("a", 0, &[(0, &[15])])];
        let batch = batch_visits(&records, 1).unwrap().remove(0);
        assert!(predict_probs(&spec, &params, &batch).is_err());
    }
}
