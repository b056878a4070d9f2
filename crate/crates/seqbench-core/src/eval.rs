//! AUROC, model selection, and benchmark report rendering.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hpo::{Trial, TrialStatus};

/// Fixed report row vocabulary and order.
pub const MODEL_ORDER: [&str; 13] = [
    "GRU",
    "LSTM",
    "D-GRU",
    "D-LSTM",
    "QRNN",
    "RETAIN",
    "LR",
    "Bi-GRU",
    "Bi-LSTM",
    "Bi-RNN",
    "D-RNN",
    "Vanilla-RNN",
    "T-LSTM",
];

/// Benchmark task columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Hf,
    Readm,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Hf => "hf",
            Task::Readm => "readm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hf" => Ok(Task::Hf),
            "readm" => Ok(Task::Readm),
            _ => Err(Error::Invalid(format!("unknown task {s:?}, expected hf or readm"))),
        }
    }
}

/// Area under the ROC curve in its Mann-Whitney form.
///
/// Computed by sorting once and averaging ranks over tied scores, which is
/// exactly the mean pairwise credit (1 for a positive outranking a negative,
/// 0.5 for a tie) without the O(n²) enumeration.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "auroc: {} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Invalid(format!("auroc: label {bad} is not binary")));
    }
    if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("auroc: score[{pos}]")));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Invalid(
            "auroc undefined: both classes must be present".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Average 1-based ranks across each tie group, summed over positives.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let n_pos_f = n_pos as f64;
    let u = rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0;
    Ok(u / (n_pos_f * n_neg as f64))
}

/// Picks the best successful trial of one study: argmax by validation AUROC,
/// earliest trial on ties. Test AUROC is reported, never used for selection.
pub fn select_best(trials: &[Trial]) -> Result<&Trial> {
    trials
        .iter()
        .filter(|t| t.status == TrialStatus::Ok)
        .fold(None::<&Trial>, |best, t| match best {
            Some(b) if t.valid_auroc > b.valid_auroc => Some(t),
            Some(b) => Some(b),
            None => Some(t),
        })
        .ok_or_else(|| Error::Invalid("select_best: no successful trial".into()))
}

/// One rendered report row; cells hold AUROC fractions in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub hf: Option<f64>,
    pub readm: Option<f64>,
}

/// Table-style benchmark report.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<ReportRow>,
}

impl BenchmarkReport {
    /// CSV with AUROC rendered as a percentage with one decimal, rounded
    /// half-up in decimal terms; missing cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,hf_auroc,readm_auroc\n");
        for row in &self.rows {
            out.push_str(&row.model);
            out.push(',');
            if let Some(v) = row.hf {
                out.push_str(&render_pct(v));
            }
            out.push(',');
            if let Some(v) = row.readm {
                out.push_str(&render_pct(v));
            }
            out.push('\n');
        }
        out
    }
}

/// Renders an AUROC fraction as a percentage with one decimal, half-up.
///
/// The tiny nudge keeps decimal inputs honest: 0.8485 stored as the nearest
/// f64 sits a hair below the true decimal, and without the nudge it would
/// round down instead of half-up.
fn render_pct(v: f64) -> String {
    let thousandths = libm::floor(v * 1000.0 + 0.5 + 1e-9) as i64;
    format!("{}.{}", thousandths / 10, thousandths % 10)
}

/// Assembles a report from (model, task, AUROC) cells.
///
/// Rows appear in the fixed vocabulary order and only for models that have
/// at least one cell. Unknown model names and duplicate cells error.
pub fn make_report(cells: &[(String, Task, f64)]) -> Result<BenchmarkReport> {
    for (model, _, auroc) in cells {
        if !MODEL_ORDER.contains(&model.as_str()) {
            return Err(Error::Invalid(format!("unknown report model {model:?}")));
        }
        if !(0.0..=1.0).contains(auroc) {
            return Err(Error::Invalid(format!(
                "report cell for {model}: AUROC {auroc} outside [0, 1]"
            )));
        }
    }
    let mut rows = Vec::new();
    for &name in MODEL_ORDER.iter() {
        let mut row = ReportRow { model: String::from(name), hf: None, readm: None };
        let mut touched = false;
        for (model, task, auroc) in cells.iter().filter(|(m, _, _)| m == name) {
            let slot = match task {
                Task::Hf => &mut row.hf,
                Task::Readm => &mut row.readm,
            };
            if slot.is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate report cell for {model} / {}",
                    task.as_str()
                )));
            }
            *slot = Some(*auroc);
            touched = true;
        }
        if touched {
            rows.push(row);
        }
    }
    Ok(BenchmarkReport { rows })
}
