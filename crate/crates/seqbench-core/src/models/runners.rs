//! Wiring cells across time: standard, bidirectional, dilated, QRNN fo-pool
//! and the T-LSTM loop.
//!
//! Padding sits at the tail of every sequence, so left-to-right recurrences
//! simply run over the full padded length and the caller gathers each row's
//! state at its last real visit; states computed past that point never feed
//! the output. Right-to-left passes instead carry state through masked
//! positions so that rows of different lengths can share one loop.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

use super::cells::{cell_step, tlstm_adjust, CellState, CellVars, LstmVars};

fn zero_state(tape: &mut Tape, vars: &CellVars, rows: usize, hidden: usize) -> CellState {
    let h = tape.leaf(Tensor::zeros(&[rows, hidden]));
    let c = vars.has_cell_state().then(|| tape.leaf(Tensor::zeros(&[rows, hidden])));
    CellState { h, c }
}

fn batch_rows(tape: &Tape, xs: &[Var]) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::Invalid("recurrence over an empty sequence".into()));
    }
    Ok(tape.value(xs[0]).shape()[0])
}

/// One recurrent layer with the given dilation: step t reads the state of
/// step t - dilation, or the zero state when that lands before the sequence.
/// Returns the full hidden sequence.
pub fn run_layer(
    tape: &mut Tape,
    vars: &CellVars,
    xs: &[Var],
    dilation: usize,
    hidden: usize,
) -> Result<Vec<Var>> {
    if dilation == 0 {
        return Err(Error::Invalid("dilation must be at least 1".into()));
    }
    let rows = batch_rows(tape, xs)?;
    let init = zero_state(tape, vars, rows, hidden);
    let mut states: Vec<CellState> = Vec::with_capacity(xs.len());
    for (t, &x) in xs.iter().enumerate() {
        let prev = if t >= dilation { &states[t - dilation] } else { &init };
        let prev = CellState { h: prev.h, c: prev.c };
        states.push(cell_step(tape, vars, &prev, x)?);
    }
    Ok(states.iter().map(|s| s.h).collect())
}

/// Left-to-right recurrence; output is each row's hidden state at its last
/// real visit.
pub fn run_standard(
    tape: &mut Tape,
    vars: &CellVars,
    xs: &[Var],
    last_index: &[usize],
    hidden: usize,
) -> Result<Var> {
    let hs = run_layer(tape, vars, xs, 1, hidden)?;
    tape.gather_time(&hs, last_index)
}

/// Stacked dilated layers: layer l uses dilation 2^l and consumes the
/// previous layer's hidden sequence. One layer reduces exactly to
/// [`run_standard`].
pub fn run_dilated(
    tape: &mut Tape,
    layers: &[CellVars],
    xs: &[Var],
    last_index: &[usize],
    hidden: usize,
) -> Result<Var> {
    if layers.is_empty() {
        return Err(Error::Invalid("dilated run needs at least one layer".into()));
    }
    let mut seq = xs.to_vec();
    for (l, vars) in layers.iter().enumerate() {
        seq = run_layer(tape, vars, &seq, 1 << l, hidden)?;
    }
    tape.gather_time(&seq, last_index)
}

/// Right-to-left states, one per original position; masked positions carry
/// the incoming state through unchanged. Entry t is the state after reading
/// visits last..t in reverse, so entry 0 is the full reversed read.
pub(crate) fn reversed_states(
    tape: &mut Tape,
    vars: &CellVars,
    xs: &[Var],
    step_masks: &[Vec<f64>],
    hidden: usize,
) -> Result<Vec<CellState>> {
    let rows = batch_rows(tape, xs)?;
    if step_masks.len() != xs.len() {
        return Err(Error::Shape(alloc::format!(
            "reversed run: {} mask columns for {} steps",
            step_masks.len(),
            xs.len()
        )));
    }
    let mut state = zero_state(tape, vars, rows, hidden);
    let mut out: Vec<CellState> = Vec::with_capacity(xs.len());
    for t in (0..xs.len()).rev() {
        let fresh = cell_step(tape, vars, &state, xs[t])?;
        let h = tape.blend_rows(fresh.h, state.h, &step_masks[t])?;
        let c = match (fresh.c, state.c) {
            (Some(f), Some(o)) => Some(tape.blend_rows(f, o, &step_masks[t])?),
            _ => None,
        };
        state = CellState { h, c };
        out.push(state);
    }
    out.reverse();
    Ok(out)
}

/// Final state of the right-to-left pass over each row's real visits.
pub fn run_reversed(
    tape: &mut Tape,
    vars: &CellVars,
    xs: &[Var],
    step_masks: &[Vec<f64>],
    hidden: usize,
) -> Result<Var> {
    let states = reversed_states(tape, vars, xs, step_masks, hidden)?;
    Ok(states[0].h)
}

/// Concatenation of the forward pass's final state and the backward pass's
/// final state, each with its own parameters.
pub fn run_bidirectional(
    tape: &mut Tape,
    fwd: &CellVars,
    bwd: &CellVars,
    xs: &[Var],
    last_index: &[usize],
    step_masks: &[Vec<f64>],
    hidden: usize,
) -> Result<Var> {
    let forward = run_standard(tape, fwd, xs, last_index, hidden)?;
    let backward = run_reversed(tape, bwd, xs, step_masks, hidden)?;
    tape.concat_cols(&[forward, backward])
}

/// Bound parameter handles for a QRNN: per gate, one weight per filter tap
/// (tap k-1 multiplies the current step) plus a bias.
#[derive(Debug, Clone)]
pub struct QrnnVars {
    pub z_w: Vec<Var>,
    pub z_b: Var,
    pub f_w: Vec<Var>,
    pub f_b: Var,
    pub o_w: Vec<Var>,
    pub o_b: Var,
}

impl QrnnVars {
    fn width(&self) -> Result<usize> {
        let k = self.z_w.len();
        if k == 0 || self.f_w.len() != k || self.o_w.len() != k {
            return Err(Error::Invalid("qrnn gates disagree on filter width".into()));
        }
        Ok(k)
    }
}

/// Causal-convolution gates plus fo-pooling:
/// c_t = f_t . c_{t-1} + (1 - f_t) . z_t, h_t = o_t . c_t.
pub fn qrnn_forward(
    tape: &mut Tape,
    vars: &QrnnVars,
    xs: &[Var],
    last_index: &[usize],
    hidden: usize,
) -> Result<Var> {
    let rows = batch_rows(tape, xs)?;
    let k = vars.width()?;
    let conv = |tape: &mut Tape, t: usize, ws: &[Var], b: Var| -> Result<Var> {
        // Width-k causal convolution, zero-padded on the left: taps that
        // reach before the sequence start contribute nothing.
        let mut acc: Option<Var> = None;
        for (j, &w) in ws.iter().enumerate() {
            let Some(src) = (t + j + 1).checked_sub(k) else { continue };
            let term = tape.matmul(xs[src], w)?;
            acc = Some(match acc {
                Some(a) => tape.add(a, term)?,
                None => term,
            });
        }
        let acc = match acc {
            Some(a) => a,
            None => tape.leaf(Tensor::zeros(&[rows, hidden])),
        };
        tape.add_row_bias(acc, b)
    };

    let mut c_prev: Option<Var> = None;
    let mut hs: Vec<Var> = Vec::with_capacity(xs.len());
    for t in 0..xs.len() {
        let z_pre = conv(tape, t, &vars.z_w, vars.z_b)?;
        let z = tape.tanh(z_pre)?;
        let f_pre = conv(tape, t, &vars.f_w, vars.f_b)?;
        let f = tape.sigmoid(f_pre)?;
        let o_pre = conv(tape, t, &vars.o_w, vars.o_b)?;
        let o = tape.sigmoid(o_pre)?;
        let write = tape.affine_scalar(f, -1.0, 1.0)?;
        let written = tape.mul(write, z)?;
        let c = match c_prev {
            Some(prev) => {
                let carried = tape.mul(f, prev)?;
                tape.add(carried, written)?
            }
            None => written,
        };
        hs.push(tape.mul(o, c)?);
        c_prev = Some(c);
    }
    tape.gather_time(&hs, last_index)
}

/// T-LSTM loop: before every step the carried memory is decomposed and its
/// short-term component discounted by the elapsed days for that step.
pub fn run_tlstm(
    tape: &mut Tape,
    lstm: &LstmVars,
    decay_w: Var,
    decay_b: Var,
    xs: &[Var],
    deltas: &[Vec<f64>],
    last_index: &[usize],
    hidden: usize,
) -> Result<Var> {
    let rows = batch_rows(tape, xs)?;
    if deltas.len() != xs.len() {
        return Err(Error::Shape(alloc::format!(
            "tlstm: {} delta columns for {} steps",
            deltas.len(),
            xs.len()
        )));
    }
    let vars = CellVars::Lstm(*lstm);
    let mut state = zero_state(tape, &vars, rows, hidden);
    let mut hs: Vec<Var> = Vec::with_capacity(xs.len());
    for (t, &x) in xs.iter().enumerate() {
        let c = state.c.expect("lstm state");
        let adjusted = tlstm_adjust(tape, decay_w, decay_b, c, &deltas[t])?;
        state = cell_step(tape, &vars, &CellState { h: state.h, c: Some(adjusted) }, x)?;
        hs.push(state.h);
    }
    tape.gather_time(&hs, last_index)
}
