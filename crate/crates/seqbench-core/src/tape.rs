//! Reverse-mode autodiff over an eager tape.
//!
//! Every operation computes its value immediately and records enough of its
//! inputs to replay the chain rule. `backward` walks the tape once from the
//! loss to the leaves, accumulating gradients; a node used by several
//! consumers receives the sum of their contributions automatically.
//!
//! The op set is deliberately small: dense matrix products, elementwise
//! arithmetic, the three activations, and a handful of structural ops
//! (concatenation, slicing, row blending, masked softmax, embedding bags,
//! time gathering) that recurrent models need to stay mask-correct without
//! per-row control flow.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::tensor::{matmul, matmul_nt, matmul_tn, Tensor};

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

/// Activation kinds accepted by [`Tape::activate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
    /// Softmax over the last axis, with row-max subtraction for stability.
    SoftmaxLastAxis,
}

enum Op {
    Leaf,
    MatMul { a: Var, b: Var },
    Add { a: Var, b: Var },
    Sub { a: Var, b: Var },
    Mul { a: Var, b: Var },
    /// y = mul·x + add, elementwise with scalar constants.
    AffineScalar { x: Var, mul: f64 },
    /// y[r][c] = x[r][c] + bias[c].
    AddRowBias { x: Var, bias: Var },
    Sigmoid { x: Var },
    Tanh { x: Var },
    /// Row softmax restricted to entries with mask 1; masked outputs are 0.
    SoftmaxRows { x: Var },
    /// Columns of the parts glued left to right.
    ConcatCols { parts: Vec<Var> },
    /// Single column extracted as [m×1].
    SliceCol { x: Var, col: usize },
    /// y[r][c] = x[r][c]·scale[r] with constant per-row factors.
    ScaleRows { x: Var, scale: Vec<f64> },
    /// y[r][c] = x[r][c]·col[r][0], column is a differentiable [m×1] node.
    MulRows { x: Var, col: Var },
    /// y_r = mask[r]·new_r + (1−mask[r])·old_r.
    BlendRows { fresh: Var, old: Var, mask: Vec<f64> },
    /// Row r = mean (or sum) of table rows `ids[r]`; empty id list → zeros.
    EmbedBag { table: Var, ids: Vec<Vec<usize>>, mean: bool },
    /// Row r of the output = row r of steps[index[r]].
    GatherTime { steps: Vec<Var>, index: Vec<usize> },
    /// Mean binary cross-entropy with logits against constant labels.
    MeanBce { logits: Var, labels: Vec<f64> },
    /// Scalar sum of all elements.
    Sum { x: Var },
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Eager autodiff tape.
pub struct Tape {
    nodes: Vec<Node>,
    debug_checks: bool,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new(), debug_checks: false }
    }

    /// Enables NaN/Inf checking after every forward op (off by default; it
    /// costs a full pass over each result).
    pub fn with_debug_checks() -> Self {
        Tape { nodes: Vec::new(), debug_checks: true }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Registers an input tensor and returns its handle.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf).expect("leaf insertion cannot fail")
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient of the last `backward` call with respect to node `v`.
    pub fn grad(&self, v: Var) -> Result<&[f64]> {
        self.nodes[v.0]
            .value
            .grad()
            .ok_or_else(|| Error::Invalid("gradient not computed; call backward first".into()))
    }

    fn push(&mut self, value: Tensor, op: Op) -> Result<Var> {
        if self.debug_checks {
            value.check_finite(&format!("tape node {}", self.nodes.len()))?;
        }
        self.nodes.push(Node { value, op });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = matmul(self.value(a), self.value(b))?;
        self.push(value, Op::MatMul { a, b })
    }

    fn elementwise(&mut self, a: Var, b: Var, name: &str, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(Error::Shape(format!(
                "{name}: shapes differ, {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let data: Vec<f64> = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        let value = Tensor::new(ta.shape(), data)?;
        self.push(value, op)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, "add", |x, y| x + y, Op::Add { a, b })
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, "sub", |x, y| x - y, Op::Sub { a, b })
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, "mul", |x, y| x * y, Op::Mul { a, b })
    }

    /// y = mul·x + add with scalar constants.
    pub fn affine_scalar(&mut self, x: Var, mul: f64, add: f64) -> Result<Var> {
        let t = self.value(x);
        let data: Vec<f64> = t.data().iter().map(|&v| mul * v + add).collect();
        let value = Tensor::new(t.shape(), data)?;
        self.push(value, Op::AffineScalar { x, mul })
    }

    /// Broadcast-adds a bias over rows: x [m×n] + bias (n elements).
    pub fn add_row_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let tx = self.value(x);
        let tb = self.value(bias);
        let n = tx.last_dim();
        if tb.len() != n {
            return Err(Error::Shape(format!(
                "add_row_bias: bias length {} does not match last dim {n}",
                tb.len()
            )));
        }
        let mut data = tx.data().to_vec();
        for row in data.chunks_mut(n) {
            for (o, &b) in row.iter_mut().zip(tb.data()) {
                *o += b;
            }
        }
        let value = Tensor::new(tx.shape(), data)?;
        self.push(value, Op::AddRowBias { x, bias })
    }

    /// x·w + b, the building block of every gate.
    pub fn affine(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let xw = self.matmul(x, w)?;
        self.add_row_bias(xw, b)
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        let t = self.value(x);
        let data: Vec<f64> = t.data().iter().map(|&v| math::sigmoid(v)).collect();
        let value = Tensor::new(t.shape(), data)?;
        self.push(value, Op::Sigmoid { x })
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        let t = self.value(x);
        let data: Vec<f64> = t.data().iter().map(|&v| math::tanh(v)).collect();
        let value = Tensor::new(t.shape(), data)?;
        self.push(value, Op::Tanh { x })
    }

    pub fn activate(&mut self, x: Var, kind: Activation) -> Result<Var> {
        match kind {
            Activation::Sigmoid => self.sigmoid(x),
            Activation::Tanh => self.tanh(x),
            Activation::SoftmaxLastAxis => self.softmax_rows(x),
        }
    }

    /// Softmax over the last axis.
    pub fn softmax_rows(&mut self, x: Var) -> Result<Var> {
        let value = self.softmax_forward(x, None)?;
        self.push(value, Op::SoftmaxRows { x })
    }

    /// Softmax over the last axis restricted to entries whose mask is 1;
    /// masked entries emit exactly 0. Every row must have at least one
    /// unmasked entry.
    pub fn masked_softmax_rows(&mut self, x: Var, mask: &[f64]) -> Result<Var> {
        let t = self.value(x);
        if mask.len() != t.len() {
            return Err(Error::Shape(format!(
                "masked_softmax_rows: mask length {} vs tensor length {}",
                mask.len(),
                t.len()
            )));
        }
        let value = self.softmax_forward(x, Some(mask))?;
        self.push(value, Op::SoftmaxRows { x })
    }

    fn softmax_forward(&self, x: Var, mask: Option<&[f64]>) -> Result<Tensor> {
        let t = self.value(x);
        let n = t.last_dim();
        let mut data = vec![0.0; t.len()];
        for (r, row) in t.data().chunks(n).enumerate() {
            let mrow = mask.map(|m| &m[r * n..(r + 1) * n]);
            let live = |j: usize| mrow.map_or(true, |m| m[j] != 0.0);
            let mut max = f64::NEG_INFINITY;
            for (j, &v) in row.iter().enumerate() {
                if live(j) && v > max {
                    max = v;
                }
            }
            if max == f64::NEG_INFINITY {
                return Err(Error::Invalid(format!("softmax row {r} is fully masked")));
            }
            let mut denom = 0.0;
            for (j, &v) in row.iter().enumerate() {
                if live(j) {
                    let e = math::exp(v - max);
                    data[r * n + j] = e;
                    denom += e;
                }
            }
            for j in 0..n {
                data[r * n + j] /= denom;
            }
        }
        Tensor::new(t.shape(), data)
    }

    /// Glues matrices with equal row counts left to right.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::Invalid("concat_cols: no parts".into()));
        }
        let rows = self.value(parts[0]).dims2("concat_cols")?.0;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (r, c) = self.value(p).dims2("concat_cols")?;
            if r != rows {
                return Err(Error::Shape(format!(
                    "concat_cols: row counts differ ({rows} vs {r})"
                )));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut data = vec![0.0; rows * total];
        let mut offset = 0;
        for (&p, &w) in parts.iter().zip(&widths) {
            let t = self.value(p);
            for r in 0..rows {
                data[r * total + offset..r * total + offset + w]
                    .copy_from_slice(&t.data()[r * w..(r + 1) * w]);
            }
            offset += w;
        }
        let value = Tensor::new(&[rows, total], data)?;
        self.push(value, Op::ConcatCols { parts: parts.to_vec() })
    }

    /// Extracts one column as an [m×1] matrix.
    pub fn slice_col(&mut self, x: Var, col: usize) -> Result<Var> {
        let t = self.value(x);
        let (rows, cols) = t.dims2("slice_col")?;
        if col >= cols {
            return Err(Error::Shape(format!("slice_col: column {col} out of {cols}")));
        }
        let data: Vec<f64> = (0..rows).map(|r| t.at(r, col)).collect();
        let value = Tensor::new(&[rows, 1], data)?;
        self.push(value, Op::SliceCol { x, col })
    }

    /// Scales each row by a constant factor.
    pub fn scale_rows(&mut self, x: Var, scale: &[f64]) -> Result<Var> {
        let t = self.value(x);
        let (rows, cols) = t.dims2("scale_rows")?;
        if scale.len() != rows {
            return Err(Error::Shape(format!(
                "scale_rows: {} factors for {rows} rows",
                scale.len()
            )));
        }
        let mut data = t.data().to_vec();
        for (r, row) in data.chunks_mut(cols).enumerate() {
            for v in row {
                *v *= scale[r];
            }
        }
        let value = Tensor::new(t.shape(), data)?;
        self.push(value, Op::ScaleRows { x, scale: scale.to_vec() })
    }

    /// Multiplies each row of x by the matching entry of an [m×1] column node.
    pub fn mul_rows(&mut self, x: Var, col: Var) -> Result<Var> {
        let t = self.value(x);
        let (rows, cols) = t.dims2("mul_rows")?;
        let (crows, ccols) = self.value(col).dims2("mul_rows column")?;
        if crows != rows || ccols != 1 {
            return Err(Error::Shape(format!(
                "mul_rows: column is [{crows}x{ccols}], need [{rows}x1]"
            )));
        }
        let cdata = self.value(col).data().to_vec();
        let mut data = self.value(x).data().to_vec();
        for (r, row) in data.chunks_mut(cols).enumerate() {
            for v in row {
                *v *= cdata[r];
            }
        }
        let value = Tensor::new(&[rows, cols], data)?;
        self.push(value, Op::MulRows { x, col })
    }

    /// Per-row blend: rows with mask 1 come from `fresh`, rows with mask 0
    /// keep `old`. This is the masked-carry step of recurrences that must not
    /// advance state over padded visits.
    pub fn blend_rows(&mut self, fresh: Var, old: Var, mask: &[f64]) -> Result<Var> {
        let tf = self.value(fresh);
        let to = self.value(old);
        if tf.shape() != to.shape() {
            return Err(Error::Shape(format!(
                "blend_rows: shapes differ, {:?} vs {:?}",
                tf.shape(),
                to.shape()
            )));
        }
        let (rows, cols) = tf.dims2("blend_rows")?;
        if mask.len() != rows {
            return Err(Error::Shape(format!(
                "blend_rows: {} mask entries for {rows} rows",
                mask.len()
            )));
        }
        let mut data = vec![0.0; rows * cols];
        for r in 0..rows {
            let m = mask[r];
            for c in 0..cols {
                data[r * cols + c] = m * tf.at(r, c) + (1.0 - m) * to.at(r, c);
            }
        }
        let value = Tensor::new(&[rows, cols], data)?;
        self.push(value, Op::BlendRows { fresh, old, mask: mask.to_vec() })
    }

    /// Pools embedding-table rows per output row: mean when `mean` is set,
    /// sum otherwise. An empty id list yields a zero row.
    pub fn embed_bag(&mut self, table: Var, ids: &[Vec<usize>], mean: bool) -> Result<Var> {
        let t = self.value(table);
        let (rows, dim) = t.dims2("embed_bag table")?;
        for (r, list) in ids.iter().enumerate() {
            if let Some(&bad) = list.iter().find(|&&id| id >= rows) {
                return Err(Error::Invalid(format!(
                    "embed_bag: id {bad} in row {r} exceeds table rows {rows}"
                )));
            }
        }
        let mut data = vec![0.0; ids.len() * dim];
        for (r, list) in ids.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let out = &mut data[r * dim..(r + 1) * dim];
            for &id in list {
                let src = &t.data()[id * dim..(id + 1) * dim];
                for (o, &v) in out.iter_mut().zip(src) {
                    *o += v;
                }
            }
            if mean {
                let inv = 1.0 / list.len() as f64;
                for o in out.iter_mut() {
                    *o *= inv;
                }
            }
        }
        let value = Tensor::new(&[ids.len(), dim], data)?;
        self.push(value, Op::EmbedBag { table, ids: ids.to_vec(), mean })
    }

    /// Picks row r of steps[index[r]] for every r; all steps share one shape.
    pub fn gather_time(&mut self, steps: &[Var], index: &[usize]) -> Result<Var> {
        if steps.is_empty() {
            return Err(Error::Invalid("gather_time: no steps".into()));
        }
        let (rows, cols) = self.value(steps[0]).dims2("gather_time")?;
        for &s in steps {
            if self.value(s).shape() != [rows, cols] {
                return Err(Error::Shape("gather_time: step shapes differ".into()));
            }
        }
        if index.len() != rows {
            return Err(Error::Shape(format!(
                "gather_time: {} indices for {rows} rows",
                index.len()
            )));
        }
        if let Some(&bad) = index.iter().find(|&&i| i >= steps.len()) {
            return Err(Error::Invalid(format!(
                "gather_time: index {bad} out of {} steps",
                steps.len()
            )));
        }
        let mut data = vec![0.0; rows * cols];
        for (r, &t) in index.iter().enumerate() {
            let src = self.value(steps[t]);
            data[r * cols..(r + 1) * cols].copy_from_slice(&src.data()[r * cols..(r + 1) * cols]);
        }
        let value = Tensor::new(&[rows, cols], data)?;
        self.push(value, Op::GatherTime { steps: steps.to_vec(), index: index.to_vec() })
    }

    /// Mean BCE-with-logits against constant 0/1 labels; stable softplus form
    /// log(1+exp(−(2y−1)·logit)).
    pub fn mean_bce_with_logits(&mut self, logits: Var, labels: &[f64]) -> Result<Var> {
        let t = self.value(logits);
        let flat_ok = t.shape().len() == 1 || (t.shape().len() == 2 && t.last_dim() == 1);
        if !flat_ok || t.len() != labels.len() {
            return Err(Error::Shape(format!(
                "mean_bce_with_logits: logits {:?} vs {} labels",
                t.shape(),
                labels.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Invalid("mean_bce_with_logits: empty batch".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::Invalid(format!(
                "mean_bce_with_logits: label {bad} is not 0 or 1"
            )));
        }
        let n = labels.len() as f64;
        let mut total = 0.0;
        for (&x, &y) in t.data().iter().zip(labels) {
            let sign = 2.0 * y - 1.0;
            total += math::softplus(-sign * x);
        }
        let value = Tensor::scalar(total / n);
        self.push(value, Op::MeanBce { logits, labels: labels.to_vec() })
    }

    /// Scalar sum of all elements.
    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let total: f64 = self.value(x).data().iter().sum();
        self.push(Tensor::scalar(total), Op::Sum { x })
    }

    /// Runs reverse-mode accumulation from a scalar root. Gradients land in
    /// each node's tensor and are read back with [`Tape::grad`].
    pub fn backward(&mut self, root: Var) -> Result<()> {
        if self.value(root).len() != 1 {
            return Err(Error::Shape(format!(
                "backward root must be scalar, got {:?}",
                self.value(root).shape()
            )));
        }
        let mut grads: Vec<Vec<f64>> =
            self.nodes.iter().map(|nd| vec![0.0; nd.value.len()]).collect();
        grads[root.0][0] = 1.0;

        for i in (0..=root.0).rev() {
            // Detach the current gradient so input grads can be borrowed mutably.
            let gout = core::mem::take(&mut grads[i]);
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul { a, b } => {
                    let gt = Tensor::new(node.value.shape(), gout.clone())?;
                    let da = matmul_nt(&gt, &self.nodes[b.0].value)?;
                    let db = matmul_tn(&self.nodes[a.0].value, &gt)?;
                    axpy(&mut grads[a.0], da.data());
                    axpy(&mut grads[b.0], db.data());
                }
                Op::Add { a, b } => {
                    axpy(&mut grads[a.0], &gout);
                    axpy(&mut grads[b.0], &gout);
                }
                Op::Sub { a, b } => {
                    axpy(&mut grads[a.0], &gout);
                    for (g, &d) in grads[b.0].iter_mut().zip(&gout) {
                        *g -= d;
                    }
                }
                Op::Mul { a, b } => {
                    let (ia, ib) = (a.0, b.0);
                    for (j, &d) in gout.iter().enumerate() {
                        grads[ia][j] += d * self.nodes[ib].value.data()[j];
                    }
                    for (j, &d) in gout.iter().enumerate() {
                        grads[ib][j] += d * self.nodes[ia].value.data()[j];
                    }
                }
                Op::AffineScalar { x, mul } => {
                    for (g, &d) in grads[x.0].iter_mut().zip(&gout) {
                        *g += mul * d;
                    }
                }
                Op::AddRowBias { x, bias } => {
                    axpy(&mut grads[x.0], &gout);
                    let nb = self.nodes[bias.0].value.len();
                    for row in gout.chunks(nb) {
                        for (g, &d) in grads[bias.0].iter_mut().zip(row) {
                            *g += d;
                        }
                    }
                }
                Op::Sigmoid { x } => {
                    let y = node.value.data();
                    for (j, &d) in gout.iter().enumerate() {
                        grads[x.0][j] += d * y[j] * (1.0 - y[j]);
                    }
                }
                Op::Tanh { x } => {
                    let y = node.value.data();
                    for (j, &d) in gout.iter().enumerate() {
                        grads[x.0][j] += d * (1.0 - y[j] * y[j]);
                    }
                }
                Op::SoftmaxRows { x } => {
                    // dx_j = y_j·(d_j − Σ_k d_k·y_k); masked entries have y=0
                    // and so contribute and receive nothing.
                    let y = node.value.data();
                    let w = node.value.last_dim();
                    for r in 0..y.len() / w {
                        let ys = &y[r * w..(r + 1) * w];
                        let ds = &gout[r * w..(r + 1) * w];
                        let dot: f64 = ys.iter().zip(ds).map(|(&a, &b)| a * b).sum();
                        let gx = &mut grads[x.0][r * w..(r + 1) * w];
                        for j in 0..w {
                            gx[j] += ys[j] * (ds[j] - dot);
                        }
                    }
                }
                Op::ConcatCols { parts } => {
                    let total = node.value.last_dim();
                    let rows = node.value.len() / total;
                    let mut offset = 0;
                    for &p in parts {
                        let w = self.nodes[p.0].value.last_dim();
                        for r in 0..rows {
                            let src = &gout[r * total + offset..r * total + offset + w];
                            let dst = &mut grads[p.0][r * w..(r + 1) * w];
                            for (g, &d) in dst.iter_mut().zip(src) {
                                *g += d;
                            }
                        }
                        offset += w;
                    }
                }
                Op::SliceCol { x, col } => {
                    let cols = self.nodes[x.0].value.last_dim();
                    for (r, &d) in gout.iter().enumerate() {
                        grads[x.0][r * cols + col] += d;
                    }
                }
                Op::ScaleRows { x, scale } => {
                    let cols = node.value.last_dim();
                    for (j, &d) in gout.iter().enumerate() {
                        grads[x.0][j] += d * scale[j / cols];
                    }
                }
                Op::MulRows { x, col } => {
                    let cols = node.value.last_dim();
                    let (ix, ic) = (x.0, col.0);
                    for (j, &d) in gout.iter().enumerate() {
                        grads[ix][j] += d * self.nodes[ic].value.data()[j / cols];
                    }
                    for (j, &d) in gout.iter().enumerate() {
                        grads[ic][j / cols] += d * self.nodes[ix].value.data()[j];
                    }
                }
                Op::BlendRows { fresh, old, mask } => {
                    let cols = node.value.last_dim();
                    for (j, &d) in gout.iter().enumerate() {
                        let m = mask[j / cols];
                        grads[fresh.0][j] += m * d;
                        grads[old.0][j] += (1.0 - m) * d;
                    }
                }
                Op::EmbedBag { table, ids, mean } => {
                    let dim = node.value.last_dim();
                    for (r, list) in ids.iter().enumerate() {
                        if list.is_empty() {
                            continue;
                        }
                        let w = if *mean { 1.0 / list.len() as f64 } else { 1.0 };
                        let src = &gout[r * dim..(r + 1) * dim];
                        for &id in list {
                            let dst = &mut grads[table.0][id * dim..(id + 1) * dim];
                            for (g, &d) in dst.iter_mut().zip(src) {
                                *g += w * d;
                            }
                        }
                    }
                }
                Op::GatherTime { steps, index } => {
                    let cols = node.value.last_dim();
                    for (r, &t) in index.iter().enumerate() {
                        let src = &gout[r * cols..(r + 1) * cols];
                        let dst = &mut grads[steps[t].0][r * cols..(r + 1) * cols];
                        for (g, &d) in dst.iter_mut().zip(src) {
                            *g += d;
                        }
                    }
                }
                Op::MeanBce { logits, labels } => {
                    let d = gout[0] / labels.len() as f64;
                    let xs = self.nodes[logits.0].value.data();
                    for (j, &y) in labels.iter().enumerate() {
                        grads[logits.0][j] += d * (math::sigmoid(xs[j]) - y);
                    }
                }
                Op::Sum { x } => {
                    let d = gout[0];
                    for g in grads[x.0].iter_mut() {
                        *g += d;
                    }
                }
            }
            grads[i] = gout;
        }

        for (node, grad) in self.nodes.iter_mut().zip(grads) {
            node.value.set_grad(grad);
        }
        if self.debug_checks {
            for (i, node) in self.nodes.iter().enumerate() {
                if let Some(g) = node.value.grad() {
                    if let Some(&bad) = g.iter().find(|v| !v.is_finite()) {
                        return Err(Error::NonFinite(format!("gradient of node {i} = {bad}")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn axpy(acc: &mut [f64], delta: &[f64]) {
    for (a, &d) in acc.iter_mut().zip(delta) {
        *a += d;
    }
}
