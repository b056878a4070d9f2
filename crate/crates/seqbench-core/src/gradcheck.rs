//! Finite-difference gradient checking.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Compares an analytic gradient against central finite differences.
///
/// `f` evaluates the scalar function at a point and returns its value
/// together with the analytic gradient (flat, in the tensor's row-major
/// order). The checker queries `f` once at `point` for the analytic
/// gradient, then twice per coordinate at `point ± h·e_i`, using only the
/// value. The result is the maximum relative error over coordinates, with
/// denominator max(|analytic|, |numeric|, 1e-8).
pub fn finite_diff_check<F>(mut f: F, point: &Tensor, h: f64) -> Result<f64>
where
    F: FnMut(&Tensor) -> Result<(f64, Vec<f64>)>,
{
    if h <= 0.0 {
        return Err(Error::Invalid("finite_diff_check: step must be positive".into()));
    }
    let (_, analytic) = f(point)?;
    if analytic.len() != point.len() {
        return Err(Error::Shape(alloc::format!(
            "finite_diff_check: gradient length {} vs point length {}",
            analytic.len(),
            point.len()
        )));
    }
    let mut max_rel = 0.0;
    let mut probe = point.clone();
    for i in 0..point.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + h;
        let (plus, _) = f(&probe)?;
        probe.data_mut()[i] = orig - h;
        let (minus, _) = f(&probe)?;
        probe.data_mut()[i] = orig;
        let numeric = (plus - minus) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-8);
        let rel = (analytic[i] - numeric).abs() / denom;
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}
