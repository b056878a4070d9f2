//! Scalar math helpers over `libm`, usable without `std`.
//!
//! Everything here is a thin deterministic wrapper; the point is to keep the
//! rest of the crate free of direct `libm` calls and to centralize the
//! numerically careful forms (stable sigmoid, softplus, normal CDF).

/// e^x.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// ln(1 + x), accurate near zero.
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Hyperbolic tangent.
#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

/// x^y.
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// |x|.
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Largest integer <= x.
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Logistic sigmoid, stable for large |x|.
///
/// For x >= 0 uses 1/(1+e^-x); for x < 0 uses e^x/(1+e^x). Both branches
/// only ever exponentiate a non-positive argument, so they cannot overflow.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// ln(1 + e^x), stable for large |x|.
///
/// softplus(x) = max(x, 0) + ln(1 + e^-|x|).
#[inline]
pub fn softplus(x: f64) -> f64 {
    let m = if x > 0.0 { x } else { 0.0 };
    m + ln_1p(exp(-abs(x)))
}

/// Standard normal probability density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.3989422804014327;
    INV_SQRT_2PI * exp(-0.5 * x * x)
}

/// Standard normal cumulative distribution, via erf.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
    0.5 * (1.0 + libm::erf(x * FRAC_1_SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_matches_reference() {
        for &x in &[-30.0, -5.0, -1.0, 0.0, 1.0, 5.0, 30.0] {
            let reference = 1.0 / (1.0 + (-x as f64).exp());
            assert!((sigmoid(x) - reference).abs() < 1e-15, "x={x}");
        }
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn sigmoid_saturates_without_overflow() {
        assert_eq!(sigmoid(1e9), 1.0);
        assert_eq!(sigmoid(-1e9), 0.0);
        assert!(sigmoid(-745.0) > 0.0);
    }

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for &x in &[-20.0, -3.0, 0.0, 0.5, 4.0, 20.0] {
            let naive = (1.0 + (x as f64).exp()).ln();
            assert!((softplus(x) - naive).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn softplus_is_linear_for_large_x() {
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert_eq!(softplus(-800.0), 0.0);
    }

    #[test]
    fn normal_cdf_known_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-1.959963984540054) - 0.025).abs() < 1e-12);
    }

    #[test]
    fn normal_pdf_known_values() {
        assert!((normal_pdf(0.0) - 0.3989422804014327).abs() < 1e-15);
        let expected = 0.3989422804014327 * (-0.5f64).exp();
        assert!((normal_pdf(1.0) - expected).abs() < 1e-15);
    }
}
