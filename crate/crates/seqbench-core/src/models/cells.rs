//! Recurrent cell step functions on the tape.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::tape::{Tape, Var};

/// Bound parameter handles for one LSTM cell.
#[derive(Debug, Clone, Copy)]
pub struct LstmVars {
    pub w_i: Var,
    pub u_i: Var,
    pub b_i: Var,
    pub w_f: Var,
    pub u_f: Var,
    pub b_f: Var,
    pub w_g: Var,
    pub u_g: Var,
    pub b_g: Var,
    pub w_o: Var,
    pub u_o: Var,
    pub b_o: Var,
}

/// Bound parameter handles for one recurrent cell.
#[derive(Debug, Clone)]
pub enum CellVars {
    Rnn {
        w_x: Var,
        w_h: Var,
        b: Var,
    },
    Gru {
        w_z: Var,
        u_z: Var,
        b_z: Var,
        w_r: Var,
        u_r: Var,
        b_r: Var,
        w_h: Var,
        u_h: Var,
        b_h: Var,
    },
    Lstm(LstmVars),
}

impl CellVars {
    pub fn has_cell_state(&self) -> bool {
        matches!(self, CellVars::Lstm(_))
    }
}

/// Hidden state (and cell state for LSTMs) carried between steps.
#[derive(Debug, Clone, Copy)]
pub struct CellState {
    pub h: Var,
    pub c: Option<Var>,
}

fn gate(tape: &mut Tape, x: Var, w: Var, h: Var, u: Var, b: Var) -> Result<Var> {
    let xw = tape.matmul(x, w)?;
    let hu = tape.matmul(h, u)?;
    let pre = tape.add(xw, hu)?;
    tape.add_row_bias(pre, b)
}

/// One step of the bound cell: h' = tanh(x W_x + h W_h + b) for the vanilla
/// RNN, the fixed-convention GRU (z gates the candidate), or the LSTM.
pub fn cell_step(tape: &mut Tape, vars: &CellVars, state: &CellState, x: Var) -> Result<CellState> {
    match vars {
        CellVars::Rnn { w_x, w_h, b } => {
            let pre = gate(tape, x, *w_x, state.h, *w_h, *b)?;
            let h = tape.tanh(pre)?;
            Ok(CellState { h, c: None })
        }
        CellVars::Gru { w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h } => {
            let z_pre = gate(tape, x, *w_z, state.h, *u_z, *b_z)?;
            let z = tape.sigmoid(z_pre)?;
            let r_pre = gate(tape, x, *w_r, state.h, *u_r, *b_r)?;
            let r = tape.sigmoid(r_pre)?;
            let gated_h = tape.mul(r, state.h)?;
            let cand_pre = gate(tape, x, *w_h, gated_h, *u_h, *b_h)?;
            let cand = tape.tanh(cand_pre)?;
            // h' = (1 - z) . h + z . h~
            let keep = tape.affine_scalar(z, -1.0, 1.0)?;
            let kept = tape.mul(keep, state.h)?;
            let fresh = tape.mul(z, cand)?;
            let h = tape.add(kept, fresh)?;
            Ok(CellState { h, c: None })
        }
        CellVars::Lstm(l) => {
            let c = state.c.ok_or_else(|| Error::Invalid("lstm step without cell state".into()))?;
            let i_pre = gate(tape, x, l.w_i, state.h, l.u_i, l.b_i)?;
            let i = tape.sigmoid(i_pre)?;
            let f_pre = gate(tape, x, l.w_f, state.h, l.u_f, l.b_f)?;
            let f = tape.sigmoid(f_pre)?;
            let g_pre = gate(tape, x, l.w_g, state.h, l.u_g, l.b_g)?;
            let g = tape.tanh(g_pre)?;
            let o_pre = gate(tape, x, l.w_o, state.h, l.u_o, l.b_o)?;
            let o = tape.sigmoid(o_pre)?;
            let carried = tape.mul(f, c)?;
            let written = tape.mul(i, g)?;
            let c_next = tape.add(carried, written)?;
            let c_act = tape.tanh(c_next)?;
            let h = tape.mul(o, c_act)?;
            Ok(CellState { h, c: Some(c_next) })
        }
    }
}

/// T-LSTM memory adjustment: discount the short-term component of `c` by
/// g(dt) = 1 / ln(e + dt) before the LSTM step. `deltas` holds one
/// nonnegative elapsed-days value per batch row; values are capped at 3650
/// days to bound the discount's argument.
pub fn tlstm_adjust(
    tape: &mut Tape,
    decay_w: Var,
    decay_b: Var,
    c: Var,
    deltas: &[f64],
) -> Result<Var> {
    if let Some(&bad) = deltas.iter().find(|&&dt| !(dt >= 0.0)) {
        return Err(Error::Invalid(format!("tlstm: negative elapsed time {bad}")));
    }
    let discounts: Vec<f64> =
        deltas.iter().map(|&dt| 1.0 / math::ln(core::f64::consts::E + dt.min(3650.0))).collect();
    let short_pre = tape.matmul(c, decay_w)?;
    let short_pre = tape.add_row_bias(short_pre, decay_b)?;
    let short = tape.tanh(short_pre)?;
    let discounted = tape.scale_rows(short, &discounts)?;
    let long = tape.sub(c, short)?;
    tape.add(long, discounted)
}
