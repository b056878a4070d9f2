//! Expected improvement, maximize form.

use crate::math;

/// EI(x) = (mu - best - xi) Phi(z) + sigma phi(z) with
/// z = (mu - best - xi) / sigma; degenerates to max(mu - best - xi, 0) when
/// sigma vanishes. Always nonnegative.
pub fn expected_improvement(mu: f64, sigma: f64, best: f64, xi: f64) -> f64 {
    let gain = mu - best - xi;
    if sigma <= 0.0 {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    (gain * math::normal_cdf(z) + sigma * math::normal_pdf(z)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_sigma_cases() {
        assert_eq!(expected_improvement(0.7, 0.0, 0.7, 0.01), 0.0);
        assert_eq!(expected_improvement(0.7, 0.0, 0.7, 0.0), 0.0);
        assert_eq!(expected_improvement(0.5, 0.0, 0.7, 0.01), 0.0);
        // Positive certain gain passes through.
        assert!((expected_improvement(1.71, 0.0, 0.7, 0.01) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn at_the_incumbent_with_unit_sigma() {
        // mu = best, xi = 0: the linear term vanishes at z = 0 and EI is
        // sigma * phi(0).
        let ei = expected_improvement(0.4, 1.0, 0.4, 0.0);
        assert!((ei - 0.3989422804014327).abs() < 1e-12);
    }

    #[test]
    fn approaches_certain_gain_as_sigma_shrinks() {
        let gain = 1.0;
        let mut prev = f64::INFINITY;
        for sigma in [1.0, 0.1, 1e-3, 1e-6, 1e-9] {
            let ei = expected_improvement(gain + 0.7 + 0.01, sigma, 0.7, 0.01);
            // Converges from above and saturates at the certain gain.
            assert!((ei - gain).abs() <= prev);
            prev = (ei - gain).abs();
        }
        let tiny = expected_improvement(gain + 0.7 + 0.01, 1e-12, 0.7, 0.01);
        assert!((tiny - gain).abs() < 1e-9);
    }

    #[test]
    fn nonnegative_and_monotone_in_sigma() {
        for &mu in &[-0.5, 0.0, 0.3, 0.9] {
            let mut prev = -1.0;
            for step in 0..50 {
                let sigma = step as f64 * 0.05;
                let ei = expected_improvement(mu, sigma, 0.2, 0.01);
                assert!(ei >= 0.0);
                if mu > 0.2 {
                    assert!(ei >= prev - 1e-12, "mu {mu} sigma {sigma}");
                }
                prev = ei;
            }
        }
    }
}
