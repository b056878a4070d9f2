//! Gaussian-process surrogate with a Matern-5/2 kernel on the unit cube.
//!
//! Hyperparameters are fixed rather than fitted: constant mean at the sample
//! mean, per-dimension length-scale 0.2, signal variance at the sample
//! variance (floored), diagonal jitter 1e-6 escalating tenfold when the
//! Cholesky factorization stalls. No MLE keeps refits bit-reproducible.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

const LENGTH_SCALE: f64 = 0.2;
const VARIANCE_FLOOR: f64 = 1e-4;
const BASE_JITTER: f64 = 1e-6;
const JITTER_ESCALATIONS: u32 = 6;

/// Fitted posterior evaluator.
#[derive(Debug, Clone)]
pub struct Surrogate {
    points: Vec<Vec<f64>>,
    /// Lower-triangular Cholesky factor of K + jitter*I, row-major packed.
    chol: Vec<f64>,
    /// K^-1 (y - mean).
    alpha: Vec<f64>,
    mean: f64,
    signal_var: f64,
    jitter: f64,
    dims: usize,
}

fn matern52(a: &[f64], b: &[f64], signal_var: f64) -> f64 {
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y) / LENGTH_SCALE;
        sq += d * d;
    }
    let r = math::sqrt(5.0 * sq);
    signal_var * (1.0 + r + r * r / 3.0) * math::exp(-r)
}

/// In-place Cholesky of a packed lower-triangular view of a symmetric
/// matrix; fails on a non-positive pivot.
fn cholesky(packed: &mut [f64], n: usize) -> bool {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = packed[i * (i + 1) / 2 + j];
            for k in 0..j {
                sum -= packed[i * (i + 1) / 2 + k] * packed[j * (j + 1) / 2 + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                packed[i * (i + 1) / 2 + j] = math::sqrt(sum);
            } else {
                packed[i * (i + 1) / 2 + j] = sum / packed[j * (j + 1) / 2 + j];
            }
        }
    }
    true
}

fn forward_solve(chol: &[f64], n: usize, rhs: &mut [f64]) {
    for i in 0..n {
        let mut sum = rhs[i];
        for k in 0..i {
            sum -= chol[i * (i + 1) / 2 + k] * rhs[k];
        }
        rhs[i] = sum / chol[i * (i + 1) / 2 + i];
    }
}

fn backward_solve(chol: &[f64], n: usize, rhs: &mut [f64]) {
    for i in (0..n).rev() {
        let mut sum = rhs[i];
        for k in i + 1..n {
            sum -= chol[k * (k + 1) / 2 + i] * rhs[k];
        }
        rhs[i] = sum / chol[i * (i + 1) / 2 + i];
    }
}

/// Fits the surrogate to observed (point, value) pairs.
pub fn fit_surrogate(points: &[Vec<f64>], values: &[f64]) -> Result<Surrogate> {
    if points.is_empty() || points.len() != values.len() {
        return Err(Error::Invalid(format!(
            "surrogate needs matching nonempty observations, got {} points and {} values",
            points.len(),
            values.len()
        )));
    }
    let dims = points[0].len();
    if dims == 0 || points.iter().any(|p| p.len() != dims) {
        return Err(Error::Invalid("surrogate points disagree on dimension".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("surrogate observation".into()));
    }

    let n = points.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let signal_var = if n >= 2 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).max(VARIANCE_FLOOR)
    } else {
        VARIANCE_FLOOR
    };

    let mut base = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        for j in 0..=i {
            base[i * (i + 1) / 2 + j] = matern52(&points[i], &points[j], signal_var);
        }
    }

    let mut jitter = BASE_JITTER;
    for _ in 0..=JITTER_ESCALATIONS {
        let mut chol = base.clone();
        for i in 0..n {
            chol[i * (i + 1) / 2 + i] += jitter;
        }
        if cholesky(&mut chol, n) {
            let mut alpha: Vec<f64> = values.iter().map(|v| v - mean).collect();
            forward_solve(&chol, n, &mut alpha);
            backward_solve(&chol, n, &mut alpha);
            return Ok(Surrogate {
                points: points.to_vec(),
                chol,
                alpha,
                mean,
                signal_var,
                jitter,
                dims,
            });
        }
        jitter *= 10.0;
    }
    Err(Error::Numeric(format!(
        "surrogate kernel stayed singular after jitter escalation to {jitter:.1e}"
    )))
}

impl Surrogate {
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Posterior mean and standard deviation of the latent function.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dims {
            return Err(Error::Shape(format!(
                "surrogate query has {} dims, fitted on {}",
                x.len(),
                self.dims
            )));
        }
        let n = self.points.len();
        let mut k_star: Vec<f64> =
            self.points.iter().map(|p| matern52(p, x, self.signal_var)).collect();
        let mu = self.mean + k_star.iter().zip(&self.alpha).map(|(k, a)| k * a).sum::<f64>();
        forward_solve(&self.chol, n, &mut k_star);
        let explained: f64 = k_star.iter().map(|v| v * v).sum();
        let var = (self.signal_var - explained).max(0.0);
        Ok((mu, math::sqrt(var)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn interpolates_single_observation() {
        let surrogate = fit_surrogate(&[vec![0.4, 0.6]], &[0.83]).unwrap();
        let (mu, sigma) = surrogate.predict(&[0.4, 0.6]).unwrap();
        assert!((mu - 0.83).abs() < 1e-3);
        assert!(sigma <= 1e-2);
    }

    #[test]
    fn reverts_to_prior_far_from_data() {
        let mut rng = Rng::new(9);
        let points: Vec<Vec<f64>> =
            (0..6).map(|_| vec![rng.uniform(0.0, 0.3)]).collect();
        let values: Vec<f64> = (0..6).map(|_| rng.uniform(0.6, 0.9)).collect();
        let surrogate = fit_surrogate(&points, &values).unwrap();
        // More than five length-scales beyond every observation.
        let (mu, sigma) = surrogate.predict(&[1.8]).unwrap();
        let mean = values.iter().sum::<f64>() / 6.0;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 5.0;
        let sd = libm::sqrt(var.max(1e-4));
        assert!((mu - mean).abs() < 0.05 * mean.abs() + 1e-6);
        assert!((sigma - sd).abs() < 0.05 * sd);
    }

    #[test]
    fn posterior_mean_matches_direct_kernel_solve() {
        // Independent oracle: assemble the same kernel system and solve it
        // by Gaussian elimination.
        let mut rng = Rng::new(31);
        let points: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.next_f64()]).collect();
        let values: Vec<f64> = (0..5).map(|_| rng.uniform(0.2, 0.9)).collect();
        let surrogate = fit_surrogate(&points, &values).unwrap();

        let n = 5;
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).max(1e-4)
        };
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                k[i][j] = matern52(&points[i], &points[j], var);
                if i == j {
                    k[i][j] += 1e-6;
                }
            }
        }
        let mut rhs: Vec<f64> = values.iter().map(|v| v - mean).collect();
        // Gaussian elimination with partial pivoting.
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&a, &b| k[a][col].abs().total_cmp(&k[b][col].abs()))
                .unwrap();
            k.swap(col, pivot);
            rhs.swap(col, pivot);
            for row in col + 1..n {
                let factor = k[row][col] / k[col][col];
                for c in col..n {
                    k[row][c] -= factor * k[col][c];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
        let mut alpha = vec![0.0; n];
        for row in (0..n).rev() {
            let mut sum = rhs[row];
            for c in row + 1..n {
                sum -= k[row][c] * alpha[c];
            }
            alpha[row] = sum / k[row][row];
        }

        for q in [0.0, 0.2, 0.55, 0.9] {
            let (mu, _) = surrogate.predict(&[q]).unwrap();
            let k_star: Vec<f64> =
                points.iter().map(|p| matern52(p, &[q], var)).collect();
            let oracle =
                mean + k_star.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
            assert!((mu - oracle).abs() < 1e-8, "query {q}: {mu} vs {oracle}");
        }
    }

    #[test]
    fn duplicate_points_survive_via_jitter() {
        let points = vec![vec![0.3, 0.3], vec![0.3, 0.3], vec![0.3, 0.3]];
        let surrogate = fit_surrogate(&points, &[0.5, 0.5, 0.5]).unwrap();
        let (mu, sigma) = surrogate.predict(&[0.3, 0.3]).unwrap();
        assert!((mu - 0.5).abs() < 1e-6);
        assert!(sigma < 0.05);
    }

    #[test]
    fn posterior_variance_small_at_every_observation() {
        let mut rng = Rng::new(55);
        let points: Vec<Vec<f64>> =
            (0..12).map(|_| (0..3).map(|_| rng.next_f64()).collect()).collect();
        let values: Vec<f64> = (0..12).map(|_| rng.uniform(0.5, 0.95)).collect();
        let surrogate = fit_surrogate(&points, &values).unwrap();
        for p in &points {
            let (_, sigma) = surrogate.predict(p).unwrap();
            assert!(sigma * sigma <= 2.0 * surrogate.jitter());
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(fit_surrogate(&[], &[]).is_err());
        assert!(fit_surrogate(&[vec![0.1]], &[0.1, 0.2]).is_err());
        assert!(fit_surrogate(&[vec![0.1], vec![0.1, 0.2]], &[0.1, 0.2]).is_err());
        assert!(fit_surrogate(&[vec![0.1]], &[f64::NAN]).is_err());
    }
}
