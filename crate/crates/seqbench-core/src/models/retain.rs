//! Reverse-time attention: two right-to-left GRUs produce per-visit scalar
//! attentions (alpha) and per-dimension gates (beta); the prediction reads a
//! weighted sum of the visit embeddings themselves, which is what makes the
//! attributions interpretable.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tape::{Tape, Var};

use super::cells::CellVars;
use super::runners::reversed_states;

/// Bound parameter handles for RETAIN.
#[derive(Debug, Clone)]
pub struct RetainVars {
    pub alpha_cell: CellVars,
    pub beta_cell: CellVars,
    pub alpha_w: Var,
    pub alpha_b: Var,
    pub beta_w: Var,
    pub beta_b: Var,
    pub head_w: Var,
    pub head_b: Var,
}

/// Forward result: the prediction logit plus the attention terms.
#[derive(Debug, Clone)]
pub struct RetainOutput {
    pub logits: Var,
    /// [B x T]; zero at padded positions, rows sum to 1 over real visits.
    pub alpha: Var,
    /// Per-visit [B x d] gates.
    pub betas: Vec<Var>,
}

/// Runs RETAIN over embedded visits.
///
/// `mask_flat` is the row-major [B x T] visit mask; `step_masks` holds the
/// same mask as one column per step for the reversed recurrences.
pub fn retain_forward(
    tape: &mut Tape,
    vars: &RetainVars,
    visits: &[Var],
    mask_flat: &[f64],
    step_masks: &[Vec<f64>],
    hidden: usize,
) -> Result<RetainOutput> {
    if visits.is_empty() {
        return Err(Error::Invalid("retain: empty visit sequence".into()));
    }
    let alpha_states = reversed_states(tape, &vars.alpha_cell, visits, step_masks, hidden)?;
    let beta_states = reversed_states(tape, &vars.beta_cell, visits, step_masks, hidden)?;

    let mut energies: Vec<Var> = Vec::with_capacity(visits.len());
    for state in &alpha_states {
        energies.push(tape.affine(state.h, vars.alpha_w, vars.alpha_b)?);
    }
    let energy = tape.concat_cols(&energies)?;
    let alpha = tape.masked_softmax_rows(energy, mask_flat)?;

    let mut betas: Vec<Var> = Vec::with_capacity(visits.len());
    let mut context: Option<Var> = None;
    for (t, state) in beta_states.iter().enumerate() {
        let beta_pre = tape.affine(state.h, vars.beta_w, vars.beta_b)?;
        let beta = tape.tanh(beta_pre)?;
        betas.push(beta);
        let gated = tape.mul(beta, visits[t])?;
        let alpha_t = tape.slice_col(alpha, t)?;
        let weighted = tape.mul_rows(gated, alpha_t)?;
        context = Some(match context {
            Some(acc) => tape.add(acc, weighted)?,
            None => weighted,
        });
    }
    let context = context.expect("nonempty visit sequence");
    let logits = tape.affine(context, vars.head_w, vars.head_b)?;
    Ok(RetainOutput { logits, alpha, betas })
}
