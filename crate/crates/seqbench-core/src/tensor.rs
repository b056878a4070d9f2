//! Dense row-major tensors of 64-bit reals.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense row-major array with an optional gradient buffer of identical shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    /// Builds a tensor, validating that dims are positive and the buffer
    /// length matches the shape product.
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(Error::Shape(format!("dims must be positive, got {shape:?}")));
        }
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(Error::Shape(format!(
                "buffer length {} does not match shape {shape:?} (expected {expect})",
                data.len()
            )));
        }
        Ok(Tensor { shape: shape.to_vec(), data, grad: None })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n: usize = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![0.0; n], grad: None }
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let n: usize = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![value; n], grad: None }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor { shape: vec![1], data: vec![value], grad: None }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// The two dims of a matrix, or a shape error naming the operation.
    pub fn dims2(&self, context: &str) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::Shape(format!("{context}: expected a matrix, got {:?}", self.shape))),
        }
    }

    /// Length of the last axis.
    pub fn last_dim(&self) -> usize {
        *self.shape.last().expect("shape is never empty")
    }

    /// Element at (row, col) of a matrix.
    pub fn at(&self, row: usize, col: usize) -> f64 {
        let cols = self.last_dim();
        self.data[row * cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let cols = self.last_dim();
        self.data[row * cols + col] = value;
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn set_grad(&mut self, grad: Vec<f64>) {
        debug_assert_eq!(grad.len(), self.data.len());
        self.grad = Some(grad);
    }

    pub fn clear_grad(&mut self) {
        self.grad = None;
    }

    /// Errors if any element is NaN or infinite; `name` identifies the tensor.
    pub fn check_finite(&self, name: &str) -> Result<()> {
        for (i, &v) in self.data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name}[{i}] = {v}")));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        format!("tensor{:?}", self.shape)
    }
}

/// C = A·B for matrices [m×k]·[k×n].
///
/// The loop nest is i-k-j so both the B row and the output row stream
/// contiguously, which the compiler vectorizes.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = a.dims2("matmul lhs")?;
    let (k2, n) = b.dims2("matmul rhs")?;
    if k != k2 {
        return Err(Error::Shape(format!(
            "matmul inner dims differ: [{m}x{k}] vs [{k2}x{n}]"
        )));
    }
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        let out_row = &mut out[i * n..(i + 1) * n];
        for (p, &av) in a_row.iter().enumerate() {
            let b_row = &b.data[p * n..(p + 1) * n];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    }
    Tensor::new(&[m, n], out)
}

/// C = A·Bᵀ for A [m×k], B [n×k]; used by backward passes.
pub(crate) fn matmul_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = a.dims2("matmul_nt lhs")?;
    let (n, k2) = b.dims2("matmul_nt rhs")?;
    if k != k2 {
        return Err(Error::Shape(format!(
            "matmul_nt inner dims differ: [{m}x{k}] vs [{n}x{k2}]t"
        )));
    }
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        let out_row = &mut out[i * n..(i + 1) * n];
        for (j, o) in out_row.iter_mut().enumerate() {
            let b_row = &b.data[j * k..(j + 1) * k];
            let mut acc = 0.0;
            for (&av, &bv) in a_row.iter().zip(b_row) {
                acc += av * bv;
            }
            *o = acc;
        }
    }
    Tensor::new(&[m, n], out)
}

/// C = Aᵀ·B for A [k×m], B [k×n]; used by backward passes.
pub(crate) fn matmul_tn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (k, m) = a.dims2("matmul_tn lhs")?;
    let (k2, n) = b.dims2("matmul_tn rhs")?;
    if k != k2 {
        return Err(Error::Shape(format!(
            "matmul_tn inner dims differ: [{k}x{m}]t vs [{k2}x{n}]"
        )));
    }
    let mut out = vec![0.0; m * n];
    for p in 0..k {
        let a_row = &a.data[p * m..(p + 1) * m];
        let b_row = &b.data[p * n..(p + 1) * n];
        for (i, &av) in a_row.iter().enumerate() {
            let out_row = &mut out[i * n..(i + 1) * n];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    }
    Tensor::new(&[m, n], out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::new(shape, data.to_vec()).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let a = t(&[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let eye = t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]);
        let c = matmul(&a, &eye).unwrap();
        assert_eq!(c.data(), a.data());
    }

    #[test]
    fn matmul_direct_arithmetic() {
        let a = t(&[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let b = t(&[2, 2], &[5.0, 6.0, 7.0, 8.0]);
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.data(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn matmul_rejects_mismatched_inner_dims() {
        let a = t(&[2, 3], &[0.0; 6]);
        let b = t(&[2, 2], &[0.0; 4]);
        assert!(matches!(matmul(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn matmul_rejects_non_matrix() {
        let a = t(&[4], &[0.0; 4]);
        let b = t(&[2, 2], &[0.0; 4]);
        assert!(matches!(matmul(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn matmul_associativity_on_random_triples() {
        let mut rng = crate::rng::Rng::new(17);
        for _ in 0..20 {
            let dims = [
                1 + rng.below(5) as usize,
                1 + rng.below(5) as usize,
                1 + rng.below(5) as usize,
                1 + rng.below(5) as usize,
            ];
            let rand = |rng: &mut crate::rng::Rng, r: usize, c: usize| {
                let data: Vec<f64> = (0..r * c).map(|_| rng.uniform(-2.0, 2.0)).collect();
                Tensor::new(&[r, c], data).unwrap()
            };
            let a = rand(&mut rng, dims[0], dims[1]);
            let b = rand(&mut rng, dims[1], dims[2]);
            let c = rand(&mut rng, dims[2], dims[3]);
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            for (&l, &r) in left.data().iter().zip(right.data()) {
                let denom = l.abs().max(r.abs()).max(1e-9);
                assert!((l - r).abs() / denom < 1e-9, "l={l} r={r}");
            }
        }
    }

    #[test]
    fn transpose_variants_match_explicit_transpose() {
        let a = t(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = t(&[4, 3], &(1..=12).map(f64::from).collect::<Vec<_>>());
        let bt = t(&[3, 4], &[1.0, 4.0, 7.0, 10.0, 2.0, 5.0, 8.0, 11.0, 3.0, 6.0, 9.0, 12.0]);
        let via_nt = matmul_nt(&a, &b).unwrap();
        let direct = matmul(&a, &bt).unwrap();
        assert_eq!(via_nt.data(), direct.data());

        let c = t(&[3, 2], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let ct = t(&[2, 3], &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
        let d = t(&[3, 4], &(1..=12).map(f64::from).collect::<Vec<_>>());
        let via_tn = matmul_tn(&c, &d).unwrap();
        let direct2 = matmul(&ct, &d).unwrap();
        assert_eq!(via_tn.data(), direct2.data());
    }

    #[test]
    fn new_validates_shape() {
        assert!(Tensor::new(&[2, 0], vec![]).is_err());
        assert!(Tensor::new(&[], vec![]).is_err());
        assert!(Tensor::new(&[2, 2], vec![0.0; 3]).is_err());
        assert!(Tensor::new(&[2, 2], vec![0.0; 4]).is_ok());
    }

    #[test]
    fn check_finite_flags_nan() {
        let mut x = Tensor::zeros(&[2, 2]);
        assert!(x.check_finite("x").is_ok());
        x.data_mut()[2] = f64::NAN;
        let err = x.check_finite("x").unwrap_err();
        assert!(matches!(err, Error::NonFinite(ref m) if m.contains("x[2]")));
    }
}
