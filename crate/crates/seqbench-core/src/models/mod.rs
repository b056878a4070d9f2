//! Sequence classifiers behind one interface.
//!
//! Every model consumes a padded [`crate::data::Batch`], embeds each visit's
//! code set (mean of embedding rows), runs an architecture-specific encoder,
//! and emits one logit per patient. Twelve recurrent variants ({vanilla RNN,
//! GRU, LSTM} x {standard, bidirectional, dilated} plus QRNN, T-LSTM and
//! RETAIN) share the cell and runner building blocks; logistic regression on
//! the bag of codes is the order-blind baseline.

mod cells;
mod forward;
mod params;
mod retain;
mod runners;

pub use cells::{cell_step, CellState, CellVars, LstmVars};
pub use forward::{
    batch_loss, bind, classify_head, ensemble_probs, forward_logits, predict_probs, BoundModel,
};
pub use params::{flatten, init_params, manifest, unflatten, Init, ParameterSet};
pub use retain::{retain_forward, RetainOutput, RetainVars};
pub use runners::{
    qrnn_forward, run_dilated, run_layer, run_reversed, run_standard, run_tlstm, QrnnVars,
};

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};

/// Recurrent cell family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Rnn,
    Gru,
    Lstm,
}

/// How cells are wired across time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    Standard,
    Bidirectional,
    Dilated,
}

/// The benchmarked architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    Recurrent { cell: Cell, connection: Connection },
    Qrnn,
    Tlstm,
    Retain,
    Lr,
}

impl Architecture {
    /// Canonical report names, matching [`crate::eval::MODEL_ORDER`].
    pub fn name(&self) -> &'static str {
        match self {
            Architecture::Recurrent { cell, connection } => match (cell, connection) {
                (Cell::Rnn, Connection::Standard) => "Vanilla-RNN",
                (Cell::Gru, Connection::Standard) => "GRU",
                (Cell::Lstm, Connection::Standard) => "LSTM",
                (Cell::Rnn, Connection::Bidirectional) => "Bi-RNN",
                (Cell::Gru, Connection::Bidirectional) => "Bi-GRU",
                (Cell::Lstm, Connection::Bidirectional) => "Bi-LSTM",
                (Cell::Rnn, Connection::Dilated) => "D-RNN",
                (Cell::Gru, Connection::Dilated) => "D-GRU",
                (Cell::Lstm, Connection::Dilated) => "D-LSTM",
            },
            Architecture::Qrnn => "QRNN",
            Architecture::Tlstm => "T-LSTM",
            Architecture::Retain => "RETAIN",
            Architecture::Lr => "LR",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::all()
            .iter()
            .copied()
            .find(|a| a.name() == name)
            .ok_or_else(|| Error::Invalid(format!("unknown architecture {name:?}")))
    }

    /// Every architecture, in report row order.
    pub fn all() -> [Architecture; 13] {
        use Architecture::Recurrent;
        [
            Recurrent { cell: Cell::Gru, connection: Connection::Standard },
            Recurrent { cell: Cell::Lstm, connection: Connection::Standard },
            Recurrent { cell: Cell::Gru, connection: Connection::Dilated },
            Recurrent { cell: Cell::Lstm, connection: Connection::Dilated },
            Architecture::Qrnn,
            Architecture::Retain,
            Architecture::Lr,
            Recurrent { cell: Cell::Gru, connection: Connection::Bidirectional },
            Recurrent { cell: Cell::Lstm, connection: Connection::Bidirectional },
            Recurrent { cell: Cell::Rnn, connection: Connection::Bidirectional },
            Recurrent { cell: Cell::Rnn, connection: Connection::Dilated },
            Recurrent { cell: Cell::Rnn, connection: Connection::Standard },
            Architecture::Tlstm,
        ]
    }
}

/// One model configuration: architecture plus the shape hyperparameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub architecture: Architecture,
    pub embed_dim: usize,
    pub hidden_size: usize,
    /// Stacked layers; only dilated connections use more than one.
    pub num_layers: usize,
    pub qrnn_filter_width: usize,
}

impl ModelSpec {
    /// A spec with per-architecture layer defaults (3 dilated layers, 1
    /// otherwise, filter width 2).
    pub fn new(architecture: Architecture, embed_dim: usize, hidden_size: usize) -> Self {
        let num_layers = match architecture {
            Architecture::Recurrent { connection: Connection::Dilated, .. } => 3,
            _ => 1,
        };
        ModelSpec { architecture, embed_dim, hidden_size, num_layers, qrnn_filter_width: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.hidden_size == 0 || self.num_layers == 0 {
            return Err(Error::Invalid(format!(
                "model spec for {}: embed_dim, hidden_size and num_layers must be positive",
                self.architecture.name()
            )));
        }
        if self.qrnn_filter_width == 0 {
            return Err(Error::Invalid("qrnn_filter_width must be positive".into()));
        }
        Ok(())
    }

    /// Width of the encoder output fed to the classification head.
    pub fn head_input(&self) -> usize {
        match self.architecture {
            Architecture::Recurrent { connection: Connection::Bidirectional, .. } => {
                2 * self.hidden_size
            }
            Architecture::Retain => self.embed_dim,
            Architecture::Lr => 0,
            _ => self.hidden_size,
        }
    }
}

pub(crate) fn arch_display(spec: &ModelSpec) -> String {
    format!("{} (d={}, H={})", spec.architecture.name(), spec.embed_dim, spec.hidden_size)
}
